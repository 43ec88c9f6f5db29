//! Time-to-solution statistics, hybrid-strategy bounds, and aggregate
//! experiment reports.

use serde::{Deserialize, Serialize};

use crate::dynamics::SuccessEstimate;
use crate::error::{CoreError, Result};

/// A time-to-solution value: finite (ns) or unbounded (no success observed
/// gives no finite estimate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TtsValue {
    Finite(f64),
    #[serde(with = "unbounded_marker")]
    Unbounded,
}

mod unbounded_marker {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("unbounded")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let v = String::deserialize(d)?;
        if v == "unbounded" {
            Ok(())
        } else {
            Err(serde::de::Error::custom("expected \"unbounded\""))
        }
    }
}

impl TtsValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            TtsValue::Finite(v) => Some(v),
            TtsValue::Unbounded => None,
        }
    }
}

/// One time-to-solution computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTSRecord {
    pub p: f64,
    pub t_ann_ns: f64,
    pub p_d: f64,
    pub tts_ns: TtsValue,
}

fn check_tts_args(p: f64, t_ann_ns: f64, p_d: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CoreError::InvalidParameter(format!(
            "success probability {p} outside [0, 1]"
        )));
    }
    if !(t_ann_ns > 0.0) {
        return Err(CoreError::InvalidParameter(
            "annealing time must be positive".into(),
        ));
    }
    if !(p_d > 0.0 && p_d < 1.0) {
        return Err(CoreError::InvalidParameter(
            "target probability must lie strictly in (0, 1)".into(),
        ));
    }
    Ok(())
}

/// Time to reach target probability `p_d` with per-run success `p`:
/// `t_ann * log(1 - p_d) / log(1 - p)`. `p = 0` has no finite value;
/// `p = 1` returns `t_ann` (the limit).
pub fn tts(p: f64, t_ann_ns: f64, p_d: f64) -> Result<TTSRecord> {
    check_tts_args(p, t_ann_ns, p_d)?;
    let tts_ns = if p == 0.0 {
        TtsValue::Unbounded
    } else if p == 1.0 {
        TtsValue::Finite(t_ann_ns)
    } else {
        TtsValue::Finite(t_ann_ns * ((1.0 - p_d).ln() / (1.0 - p).ln()))
    };
    Ok(TTSRecord {
        p,
        t_ann_ns,
        p_d,
        tts_ns,
    })
}

/// Time to target for the alternating strategy (one baseline call, one
/// offsets call, repeat): `2 t_ann log(1 - p_d) / log[(1-p_bl)(1-p_ao)]`.
/// Never exceeds twice the baseline value; if either probability is 1 the
/// limit convention is one full period, `2 t_ann`.
pub fn hybrid_tts(p_bl: f64, p_ao: f64, t_ann_ns: f64, p_d: f64) -> Result<TTSRecord> {
    check_tts_args(p_bl, t_ann_ns, p_d)?;
    check_tts_args(p_ao, t_ann_ns, p_d)?;
    let combined_failure = (1.0 - p_bl) * (1.0 - p_ao);
    let tts_ns = if p_bl == 1.0 || p_ao == 1.0 {
        TtsValue::Finite(2.0 * t_ann_ns)
    } else if combined_failure == 1.0 {
        TtsValue::Unbounded
    } else {
        TtsValue::Finite(2.0 * (t_ann_ns * ((1.0 - p_d).ln() / combined_failure.ln())))
    };
    Ok(TTSRecord {
        p: 1.0 - combined_failure,
        t_ann_ns,
        p_d,
        tts_ns,
    })
}

/// Label plus half-open percentile range `[lo, hi)` (the last range of a
/// partition is conventionally closed at 100).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRange {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

impl GroupRange {
    pub fn new(label: &str, lo: f64, hi: f64) -> Self {
        GroupRange {
            label: label.to_string(),
            lo,
            hi,
        }
    }

    fn contains(&self, rank: f64) -> bool {
        rank >= self.lo && (rank < self.hi || (self.hi == 100.0 && rank <= 100.0))
    }
}

/// Quartiles plus an overlapping hardest-10% bucket (low percentile =
/// harder, i.e. lower baseline success).
pub fn default_groups() -> Vec<GroupRange> {
    vec![
        GroupRange::new("hardest-25%", 0.0, 25.0),
        GroupRange::new("25-50%", 25.0, 50.0),
        GroupRange::new("50-75%", 50.0, 75.0),
        GroupRange::new("easiest-25%", 75.0, 100.0),
        GroupRange::new("hardest-10%", 0.0, 10.0),
    ]
}

/// Percentile ranks of baseline success probabilities and the member sets
/// of each configured range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyGrouping {
    /// Per-instance percentile rank in [0, 100]; ties share their mean rank.
    pub percentiles: Vec<f64>,
    pub groups: Vec<GroupRange>,
    /// Instance indices per group, ascending.
    pub members: Vec<Vec<usize>>,
}

/// Rank instances by baseline success probability (lower = harder = lower
/// percentile) and bucket them into the given ranges. Tied values share the
/// mean of the positions they occupy.
pub fn difficulty_groups(
    baseline_ps: &[f64],
    ranges: &[GroupRange],
) -> Result<DifficultyGrouping> {
    if baseline_ps.is_empty() {
        return Err(CoreError::EmptyInput("baseline probabilities"));
    }
    let n = baseline_ps.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| baseline_ps[a].partial_cmp(&baseline_ps[b]).unwrap());

    let mut percentiles = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && baseline_ps[order[j + 1]] == baseline_ps[order[i]] {
            j += 1;
        }
        // 1-based positions i+1 ..= j+1 share the mean rank
        let mean_rank = (i + 1 + j + 1) as f64 / 2.0;
        let pct = 100.0 * (mean_rank - 0.5) / n as f64;
        for &idx in &order[i..=j] {
            percentiles[idx] = pct;
        }
        i = j + 1;
    }

    let members = ranges
        .iter()
        .map(|g| {
            (0..n)
                .filter(|&idx| g.contains(percentiles[idx]))
                .collect()
        })
        .collect();
    Ok(DifficultyGrouping {
        percentiles,
        groups: ranges.to_vec(),
        members,
    })
}

/// Linear-interpolation percentile of already-sorted values (fraction q in
/// [0, 1] of the way through the order statistics).
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    }
}

/// Per-instance comparison of a baseline/offsets estimate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceComparison {
    pub index: usize,
    pub p_bl: f64,
    pub p_ao: f64,
    pub bl_solved: bool,
    pub ao_solved: bool,
    pub tts_bl_ns: TtsValue,
    pub tts_ao_ns: TtsValue,
    /// `TTS_BL / TTS_AO`; absent when neither side gives a finite value.
    pub ratio: Option<f64>,
    /// The ratio is only a lower bound (baseline unsolved, its probability
    /// an upper bound).
    pub ratio_is_lower_bound: bool,
    pub improved: bool,
}

/// Aggregate statistics over one difficulty group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub label: String,
    pub count: usize,
    pub fraction_improved: f64,
    pub median_ratio: Option<f64>,
    pub ratio_p35: Option<f64>,
    pub ratio_p65: Option<f64>,
    pub max_ratio: Option<f64>,
    /// Group medians computed over lower-bound ratios are themselves only
    /// lower bounds.
    pub contains_lower_bounds: bool,
}

/// Full speedup report: per-instance rows plus per-group aggregates (the
/// first group labeled "all" covers everything).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    pub t_ann_ns: f64,
    pub p_d: f64,
    pub instances: Vec<InstanceComparison>,
    pub groups: Vec<GroupStats>,
}

impl SpeedupReport {
    /// CSV rows mirroring the per-instance comparisons.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,p_bl,p_ao,bl_solved,ao_solved,tts_bl_ns,tts_ao_ns,ratio,ratio_is_lower_bound,improved\n",
        );
        let fmt_tts = |v: TtsValue| match v {
            TtsValue::Finite(x) => format!("{:.16e}", x),
            TtsValue::Unbounded => "unbounded".to_string(),
        };
        for row in &self.instances {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{},{},{},{},{},{},{}\n",
                row.index,
                row.p_bl,
                row.p_ao,
                row.bl_solved,
                row.ao_solved,
                fmt_tts(row.tts_bl_ns),
                fmt_tts(row.tts_ao_ns),
                row.ratio.map_or("".to_string(), |r| format!("{:.16e}", r)),
                row.ratio_is_lower_bound,
                row.improved,
            ));
        }
        out
    }
}

/// Build the per-instance and per-group speedup report from paired
/// baseline / anneal-offsets estimates.
///
/// Unsolved estimates enter as their probability upper bound `1/runs`
/// (never as point estimates): the corresponding baseline TTS is a lower
/// bound on the true value, so the reported ratio is flagged as a lower
/// bound. An instance counts as improved only when the offsets run is
/// solved and its point estimate exceeds the baseline's value (estimate or
/// bound).
pub fn speedup_report(
    pairs: &[(SuccessEstimate, SuccessEstimate)],
    t_ann_ns: f64,
    p_d: f64,
    ranges: &[GroupRange],
) -> Result<SpeedupReport> {
    if pairs.is_empty() {
        return Err(CoreError::EmptyInput("estimate pairs"));
    }
    let mut instances = Vec::with_capacity(pairs.len());
    for (index, (bl, ao)) in pairs.iter().enumerate() {
        let tts_bl = tts(bl.p_hat, t_ann_ns, p_d)?.tts_ns;
        let tts_ao = tts(ao.p_hat, t_ann_ns, p_d)?.tts_ns;
        let ratio = match (tts_bl.finite(), tts_ao.finite()) {
            (Some(b), Some(a)) => Some(b / a),
            _ => None,
        };
        let improved = ao.solved && ao.p_hat > bl.p_hat;
        instances.push(InstanceComparison {
            index,
            p_bl: bl.p_hat,
            p_ao: ao.p_hat,
            bl_solved: bl.solved,
            ao_solved: ao.solved,
            tts_bl_ns: tts_bl,
            tts_ao_ns: tts_ao,
            ratio,
            ratio_is_lower_bound: !bl.solved && ao.solved,
            improved,
        });
    }

    let baseline_ps: Vec<f64> = instances.iter().map(|r| r.p_bl).collect();
    let grouping = difficulty_groups(&baseline_ps, ranges)?;

    let mut groups = Vec::with_capacity(ranges.len() + 1);
    let all: Vec<usize> = (0..instances.len()).collect();
    for (label, members) in std::iter::once(("all".to_string(), &all)).chain(
        grouping
            .groups
            .iter()
            .map(|g| g.label.clone())
            .zip(grouping.members.iter()),
    ) {
        groups.push(group_stats(&label, members, &instances));
    }

    Ok(SpeedupReport {
        t_ann_ns,
        p_d,
        instances,
        groups,
    })
}

fn group_stats(label: &str, members: &[usize], rows: &[InstanceComparison]) -> GroupStats {
    let count = members.len();
    let improved = members.iter().filter(|&&i| rows[i].improved).count();
    let mut ratios: Vec<f64> = members.iter().filter_map(|&i| rows[i].ratio).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let stat = |q: f64| {
        if ratios.is_empty() {
            None
        } else {
            Some(percentile_sorted(&ratios, q))
        }
    };
    GroupStats {
        label: label.to_string(),
        count,
        fraction_improved: if count == 0 {
            0.0
        } else {
            improved as f64 / count as f64
        },
        median_ratio: stat(0.5),
        ratio_p35: stat(0.35),
        ratio_p65: stat(0.65),
        max_ratio: ratios.last().copied(),
        contains_lower_bounds: members
            .iter()
            .any(|&i| rows[i].ratio_is_lower_bound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const US: f64 = 1_000.0; // ns per microsecond

    #[test]
    fn tts_at_target_probability_is_t_ann() {
        let r = tts(0.99, 20.0 * US, 0.99).unwrap();
        assert_eq!(r.tts_ns, TtsValue::Finite(20.0 * US));
    }

    #[test]
    fn tts_midpoint_value() {
        let r = tts(0.5, 20.0 * US, 0.99).unwrap();
        let v = r.tts_ns.finite().unwrap();
        assert_relative_eq!(v / US, 132.877, max_relative = 1e-5);
        // frozen from 20 * ln(0.01) / ln(0.5) microseconds
        assert_relative_eq!(v / US, 132.87712379549449, max_relative = 1e-12);
    }

    #[test]
    fn tts_zero_probability_unbounded() {
        assert_eq!(tts(0.0, 20.0 * US, 0.99).unwrap().tts_ns, TtsValue::Unbounded);
        assert_eq!(tts(1.0, 20.0 * US, 0.99).unwrap().tts_ns, TtsValue::Finite(20.0 * US));
        assert!(tts(-0.1, 20.0 * US, 0.99).is_err());
        assert!(tts(0.5, 0.0, 0.99).is_err());
        assert!(tts(0.5, 20.0 * US, 1.0).is_err());
    }

    #[test]
    fn hybrid_saturates_bound_when_offsets_never_help() {
        let bl = tts(0.3, 20.0 * US, 0.99).unwrap().tts_ns.finite().unwrap();
        let h = hybrid_tts(0.3, 0.0, 20.0 * US, 0.99)
            .unwrap()
            .tts_ns
            .finite()
            .unwrap();
        assert_eq!(h, 2.0 * bl);
    }

    #[test]
    fn hybrid_symmetric_point() {
        let h = hybrid_tts(0.5, 0.5, 20.0 * US, 0.99)
            .unwrap()
            .tts_ns
            .finite()
            .unwrap();
        // 40 * ln(0.01) / ln(0.25) microseconds
        assert_relative_eq!(h / US, 132.87712379549449, max_relative = 1e-12);
    }

    #[test]
    fn hybrid_rescues_unsolvable_baseline() {
        let h = hybrid_tts(0.0, 0.5, 20.0 * US, 0.99).unwrap();
        let v = h.tts_ns.finite().unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert_relative_eq!(v / US, 2.0 * 132.87712379549449, max_relative = 1e-12);
        assert_eq!(
            hybrid_tts(0.0, 0.0, 20.0 * US, 0.99).unwrap().tts_ns,
            TtsValue::Unbounded
        );
        assert_eq!(
            hybrid_tts(1.0, 0.2, 20.0 * US, 0.99).unwrap().tts_ns,
            TtsValue::Finite(40.0 * US)
        );
    }

    #[test]
    fn hybrid_bound_holds_on_grid() {
        for i in 0..100 {
            for j in 0..100 {
                let p_bl = i as f64 / 100.0;
                let p_ao = j as f64 / 100.0;
                let hybrid = hybrid_tts(p_bl, p_ao, 20.0 * US, 0.99).unwrap().tts_ns;
                let baseline = tts(p_bl, 20.0 * US, 0.99).unwrap().tts_ns;
                match (hybrid, baseline) {
                    (TtsValue::Finite(h), TtsValue::Finite(b)) => {
                        assert!(
                            h <= 2.0 * b * (1.0 + 1e-12),
                            "violated at ({p_bl}, {p_ao}): {h} > 2 * {b}"
                        );
                    }
                    (TtsValue::Unbounded, TtsValue::Finite(_)) => {
                        panic!("hybrid unbounded while baseline finite at ({p_bl}, {p_ao})")
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn tts_monotonicity() {
        let mut last = f64::INFINITY;
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let v = tts(p, 20.0 * US, 0.99).unwrap().tts_ns.finite().unwrap();
            assert!(v < last);
            last = v;
        }
        let a = tts(0.3, 10.0 * US, 0.99).unwrap().tts_ns.finite().unwrap();
        let b = tts(0.3, 20.0 * US, 0.99).unwrap().tts_ns.finite().unwrap();
        assert!(b > a);
    }

    fn estimate(successes: u64, runs: u64) -> SuccessEstimate {
        SuccessEstimate::from_counts(successes, runs)
    }

    #[test]
    fn equal_pairs_give_unit_ratios() {
        let pairs: Vec<_> = (0..4)
            .map(|k| (estimate(10 + k, 100), estimate(10 + k, 100)))
            .collect();
        let report = speedup_report(&pairs, 20.0 * US, 0.99, &default_groups()).unwrap();
        for row in &report.instances {
            assert_eq!(row.ratio, Some(1.0));
            assert!(!row.improved, "equality is not an improvement");
        }
        assert_eq!(report.groups[0].fraction_improved, 0.0);
        assert_eq!(report.groups[0].median_ratio, Some(1.0));
    }

    #[test]
    fn small_probability_ratio_matches_linear_regime() {
        let pairs = vec![(estimate(1, 10_000), estimate(1_000, 10_000))];
        let report = speedup_report(&pairs, 20.0 * US, 0.99, &default_groups()).unwrap();
        let ratio = report.instances[0].ratio.unwrap();
        // ln(1 - 0.1)/ln(1 - 1e-4): the upper ratio p_ao/p_bl = 1000 is
        // inflated by the curvature of log at p = 0.1
        assert_relative_eq!(ratio, 1053.5524754425016, max_relative = 1e-9);
        assert!(report.instances[0].improved);
    }

    #[test]
    fn unsolved_baseline_produces_lower_bound() {
        let mut bl = estimate(0, 10_000_000);
        assert!(!bl.solved);
        assert_eq!(bl.p_hat, 1e-7);
        bl.ci_low = 0.0;
        let ao = estimate(9, 10);
        let report =
            speedup_report(&[(bl, ao)], 20.0 * US, 0.99, &default_groups()).unwrap();
        let row = &report.instances[0];
        assert!(row.ratio_is_lower_bound);
        assert!(row.improved);
        assert!(row.ratio.unwrap() > 1e5);
        assert!(report.groups[0].contains_lower_bounds);
    }

    #[test]
    fn ratio_inverts_under_swap() {
        let a = estimate(5, 1_000);
        let b = estimate(50, 1_000);
        let fwd = speedup_report(&[(a, b)], 20.0 * US, 0.99, &default_groups()).unwrap();
        let rev = speedup_report(&[(b, a)], 20.0 * US, 0.99, &default_groups()).unwrap();
        let f = fwd.instances[0].ratio.unwrap();
        let r = rev.instances[0].ratio.unwrap();
        assert_relative_eq!(f * r, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn grouping_four_distinct_values() {
        let g = difficulty_groups(&[0.4, 0.1, 0.3, 0.2], &default_groups()).unwrap();
        assert_eq!(g.percentiles, vec![87.5, 12.5, 62.5, 37.5]);
        // one instance per quartile
        for (idx, members) in g.members.iter().take(4).enumerate() {
            assert_eq!(members.len(), 1, "quartile {idx}");
        }
        // hardest-10% is empty here (lowest rank is 12.5)
        assert!(g.members[4].is_empty());
    }

    #[test]
    fn grouping_all_equal_shares_rank_50() {
        let g = difficulty_groups(&[0.2; 6], &default_groups()).unwrap();
        assert!(g.percentiles.iter().all(|&p| p == 50.0));
        // every instance lands in exactly one quartile range
        assert_eq!(g.members[2].len(), 6);
        assert!(g.members[0].is_empty() && g.members[1].is_empty() && g.members[3].is_empty());
    }

    #[test]
    fn hardest_ten_percent_of_two_hundred() {
        let ps: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
        let g = difficulty_groups(&ps, &default_groups()).unwrap();
        assert_eq!(g.members[4].len(), 20);
        assert!(g.members[4].iter().all(|&i| ps[i] < 0.1));
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(difficulty_groups(&[], &default_groups()).is_err());
        assert!(speedup_report(&[], 20.0 * US, 0.99, &default_groups()).is_err());
    }
}
