//! Closed-form dispersion of the unperturbed cell and its knots.
//!
//! Without a hole and with `H ≡ 1` the eigenpairs at Floquet parameter `η` are
//! `μ_jk(η) = (2πj + η)² + π²k²/(4ℓ²)` with eigenfunctions
//! `exp(i(2πj + η)y₁) cos(πk(y₂ + ℓ)/(2ℓ))`, `j ∈ ℤ`, `k ∈ ℕ₀`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Branch label `(j, k)`: Floquet shift `j` and transverse mode `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub j: i32,
    pub k: u32,
}

impl ModeIndex {
    pub const fn new(j: i32, k: u32) -> Self {
        Self { j, k }
    }

    /// `dμ/dη = 2(2πj + η)`.
    pub fn slope(&self, eta: f64) -> f64 {
        2.0 * (2.0 * PI * self.j as f64 + eta)
    }

    fn transverse(&self, ell: f64) -> f64 {
        let k = self.k as f64;
        PI * PI * k * k / (4.0 * ell * ell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KnotKind {
    /// Curves with opposite slopes; a hole opens a gap of width `O(ε²)`.
    Disintegrating,
    /// Two ascending or two descending curves; no gap opens.
    Persistent,
    /// One slope vanishes; reported without any claim.
    Tangential,
}

impl KnotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            KnotKind::Disintegrating => "disintegrating",
            KnotKind::Persistent => "persistent",
            KnotKind::Tangential => "tangential",
        }
    }
}

/// Crossing of two dispersion curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub eta_star: f64,
    pub mu_star: f64,
    pub branch_a: ModeIndex,
    pub branch_b: ModeIndex,
    pub slopes: (f64, f64),
    pub kind: KnotKind,
}

impl Knot {
    /// Stable identifier used to match predictions with measurements.
    pub fn id(&self) -> KnotId {
        KnotId { branch_a: self.branch_a, branch_b: self.branch_b, eta_star_micro: (self.eta_star * 1e6).round() as i64 }
    }

    /// Whether this is the `(η*, μ*) = (0, 4π²)` crossing of `(±1, 0)`.
    pub fn is_principal(&self) -> bool {
        self.eta_star.abs() < 1e-12
            && self.branch_a == ModeIndex::new(-1, 0)
            && self.branch_b == ModeIndex::new(1, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnotId {
    pub branch_a: ModeIndex,
    pub branch_b: ModeIndex,
    pub eta_star_micro: i64,
}

/// The `(0, 4π²)` knot of branches `(-1, 0)` and `(1, 0)`.
pub fn principal_knot() -> Knot {
    let a = ModeIndex::new(-1, 0);
    let b = ModeIndex::new(1, 0);
    let mut knot = Knot {
        eta_star: 0.0,
        mu_star: 4.0 * PI * PI,
        branch_a: a,
        branch_b: b,
        slopes: (a.slope(0.0), b.slope(0.0)),
        kind: KnotKind::Tangential,
    };
    knot.kind = classify_knot(&knot);
    knot
}

pub fn mu_jk(idx: ModeIndex, eta: f64, ell: f64) -> f64 {
    let q = 2.0 * PI * idx.j as f64 + eta;
    q * q + idx.transverse(ell)
}

pub fn sample_curve(idx: ModeIndex, ell: f64, eta_grid: &[f64]) -> Vec<(f64, f64)> {
    eta_grid.iter().map(|&eta| (eta, mu_jk(idx, eta, ell))).collect()
}

/// All branches whose minimum over `η ∈ [-π, π]` does not exceed `mu_max`,
/// in lexicographic order.
pub fn branches_below(ell: f64, mu_max: f64) -> Vec<ModeIndex> {
    if !(mu_max >= 0.0) {
        return Vec::new();
    }
    let k_max = (2.0 * ell * mu_max.sqrt() / PI).floor() as u32;
    let j_max = (mu_max.sqrt() / (2.0 * PI)).ceil() as i32 + 1;
    let mut out = Vec::new();
    for j in -j_max..=j_max {
        for k in 0..=k_max {
            let idx = ModeIndex::new(j, k);
            let q = 2.0 * PI * j as f64;
            let closest = q.clamp(-PI, PI) - q;
            if closest * closest + idx.transverse(ell) <= mu_max {
                out.push(idx);
            }
        }
    }
    out
}

const KNOT_TOL: f64 = 1e-10;

/// Every crossing of two distinct branches with `η* ∈ [-π, π]` and
/// `μ* ≤ mu_max`, sorted by `(μ*, η*)`.
///
/// Two parabolas `(2πj₁ + η)² + c₁` and `(2πj₂ + η)² + c₂` meet where a linear
/// equation in `η` holds, so every knot is found in closed form.
pub fn enumerate_knots(ell: f64, mu_max: f64) -> Vec<Knot> {
    let branches = branches_below(ell, mu_max);
    let mut knots: Vec<Knot> = Vec::new();
    for (ia, &a) in branches.iter().enumerate() {
        for &b in &branches[ia + 1..] {
            if a.j == b.j {
                continue;
            }
            let (ja, jb) = (a.j as f64, b.j as f64);
            let eta = (4.0 * PI * PI * (jb * jb - ja * ja) + b.transverse(ell) - a.transverse(ell))
                / (4.0 * PI * (ja - jb));
            if eta < -PI - KNOT_TOL || eta > PI + KNOT_TOL {
                continue;
            }
            let eta = eta.clamp(-PI, PI);
            let mu = mu_jk(a, eta, ell);
            if mu > mu_max {
                continue;
            }
            let mut knot = Knot {
                eta_star: eta,
                mu_star: mu,
                branch_a: a,
                branch_b: b,
                slopes: (a.slope(eta), b.slope(eta)),
                kind: KnotKind::Tangential,
            };
            knot.kind = classify_knot(&knot);
            let duplicate = knots.iter().any(|k| {
                (k.eta_star - eta).abs() < KNOT_TOL
                    && (k.mu_star - mu).abs() < KNOT_TOL * mu.max(1.0)
                    && k.branch_a == a
                    && k.branch_b == b
            });
            if !duplicate {
                knots.push(knot);
            }
        }
    }
    knots.sort_by(|x, y| {
        x.mu_star
            .total_cmp(&y.mu_star)
            .then(x.eta_star.total_cmp(&y.eta_star))
            .then(x.branch_a.cmp(&y.branch_a))
            .then(x.branch_b.cmp(&y.branch_b))
    });
    knots
}

pub fn classify_knot(knot: &Knot) -> KnotKind {
    let (sa, sb) = knot.slopes;
    if sa.abs() < 1e-12 || sb.abs() < 1e-12 {
        KnotKind::Tangential
    } else if sa * sb < 0.0 {
        KnotKind::Disintegrating
    } else {
        KnotKind::Persistent
    }
}

/// The `m` smallest closed-form eigenvalues at `η`, sorted.
pub fn closed_form_spectrum(ell: f64, eta: f64, m: usize) -> Vec<f64> {
    // grow the search window until it certainly holds m eigenvalues
    let mut mu_max = 4.0 * PI * PI;
    loop {
        let mut values: Vec<f64> = branches_below(ell, mu_max)
            .into_iter()
            .map(|idx| mu_jk(idx, eta, ell))
            .filter(|&mu| mu <= mu_max)
            .collect();
        if values.len() >= m {
            values.sort_by(f64::total_cmp);
            values.truncate(m);
            return values;
        }
        mu_max *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const ELL: f64 = 0.2;

    #[test]
    fn formula_values() {
        assert_eq!(mu_jk(ModeIndex::new(0, 0), 0.0, ELL), 0.0);
        assert_relative_eq!(mu_jk(ModeIndex::new(1, 0), 0.0, ELL), 39.47841760435743, max_relative = 1e-15);
        assert_relative_eq!(mu_jk(ModeIndex::new(-1, 0), 0.0, ELL), 39.47841760435743, max_relative = 1e-15);
        assert_relative_eq!(mu_jk(ModeIndex::new(0, 1), 0.0, ELL), PI * PI / 0.16, max_relative = 1e-15);
        assert_relative_eq!(mu_jk(ModeIndex::new(0, 1), 0.0, ELL), 61.68502750680849, max_relative = 1e-14);
    }

    #[test]
    fn curve_sampling() {
        let c = sample_curve(ModeIndex::new(0, 0), ELL, &[-PI, 0.0, PI]);
        assert_relative_eq!(c[0].1, PI * PI, max_relative = 1e-15);
        assert_eq!(c[1].1, 0.0);
        assert_relative_eq!(c[2].1, PI * PI, max_relative = 1e-15);
        let c = sample_curve(ModeIndex::new(1, 0), ELL, &[0.0]);
        assert_relative_eq!(c[0].1, 4.0 * PI * PI, max_relative = 1e-15);
        assert!(sample_curve(ModeIndex::new(3, 2), ELL, &[]).is_empty());
    }

    /// Independent check: bisection on the difference of every branch pair
    /// over a fine grid.
    fn brute_force_knots(ell: f64, mu_max: f64) -> Vec<(f64, f64)> {
        let branches: Vec<ModeIndex> = (-4..=4)
            .flat_map(|j| (0..=4).map(move |k| ModeIndex::new(j, k)))
            .collect();
        let grid: Vec<f64> = (0..=4000).map(|i| -PI + 2.0 * PI * i as f64 / 4000.0).collect();
        let mut out = Vec::new();
        for (ia, &a) in branches.iter().enumerate() {
            for &b in &branches[ia + 1..] {
                let f = |eta: f64| mu_jk(a, eta, ell) - mu_jk(b, eta, ell);
                for w in grid.windows(2) {
                    let (mut lo, mut hi) = (w[0], w[1]);
                    if f(lo) == 0.0 && lo == -PI {
                        out.push((lo, mu_jk(a, lo, ell)));
                    }
                    if f(hi) == 0.0 {
                        out.push((hi, mu_jk(a, hi, ell)));
                        continue;
                    }
                    if f(lo) * f(hi) < 0.0 {
                        for _ in 0..200 {
                            let mid = 0.5 * (lo + hi);
                            if f(lo) * f(mid) <= 0.0 {
                                hi = mid
                            } else {
                                lo = mid
                            }
                        }
                        out.push((lo, mu_jk(a, lo, ell)));
                    }
                }
            }
        }
        out.retain(|&(_, mu)| mu <= mu_max);
        out
    }

    #[test]
    fn knot_examples() {
        let knots = enumerate_knots(ELL, 40.0);
        let principal = knots
            .iter()
            .find(|k| k.eta_star.abs() < 1e-12 && (k.mu_star - 4.0 * PI * PI).abs() < 1e-10)
            .expect("principal knot");
        assert_eq!(principal.branch_a, ModeIndex::new(-1, 0));
        assert_eq!(principal.branch_b, ModeIndex::new(1, 0));
        assert_eq!(principal.kind, KnotKind::Disintegrating);
        assert!(principal.is_principal());

        let knots = enumerate_knots(ELL, 10.0);
        assert_eq!(knots.len(), 2);
        for k in &knots {
            assert_relative_eq!(k.eta_star.abs(), PI, max_relative = 1e-15);
            assert_relative_eq!(k.mu_star, PI * PI, max_relative = 1e-14);
        }
        let minus = knots.iter().find(|k| k.eta_star < 0.0).unwrap();
        assert_eq!((minus.branch_a, minus.branch_b), (ModeIndex::new(0, 0), ModeIndex::new(1, 0)));
        let plus = knots.iter().find(|k| k.eta_star > 0.0).unwrap();
        assert_eq!((plus.branch_a, plus.branch_b), (ModeIndex::new(-1, 0), ModeIndex::new(0, 0)));

        assert!(enumerate_knots(ELL, 0.5).is_empty());
        assert!(brute_force_knots(ELL, 0.5).is_empty());
    }

    #[test]
    fn knots_agree_with_brute_force() {
        let mu_max = 120.0;
        let closed = enumerate_knots(ELL, mu_max);
        let brute = brute_force_knots(ELL, mu_max);
        for &(eta, mu) in &brute {
            assert!(
                closed.iter().any(|k| (k.eta_star - eta).abs() < 1e-8 && (k.mu_star - mu).abs() < 1e-7),
                "missing knot at ({eta}, {mu})"
            );
        }
        for k in &closed {
            assert!(brute.iter().any(|&(e, m)| (k.eta_star - e).abs() < 1e-8 && (k.mu_star - m).abs() < 1e-7));
            assert!((mu_jk(k.branch_a, k.eta_star, ELL) - mu_jk(k.branch_b, k.eta_star, ELL)).abs() < 1e-10);
        }
    }

    #[test]
    fn persistent_knot_of_transverse_and_floquet_branches() {
        let knots = enumerate_knots(ELL, 70.0);
        let k = knots
            .iter()
            .find(|k| k.branch_a == ModeIndex::new(0, 1) && k.branch_b == ModeIndex::new(1, 0))
            .unwrap();
        // 4π² + 4πη = π²/(4ℓ²)
        let eta = (PI * PI / (4.0 * ELL * ELL) - 4.0 * PI * PI) / (4.0 * PI);
        assert_relative_eq!(k.eta_star, eta, max_relative = 1e-14);
        assert!((k.eta_star - 1.767).abs() < 1e-3);
        assert!((k.mu_star - 64.81).abs() < 1e-2);
        assert!((k.slopes.0 - 3.53).abs() < 1e-2 && (k.slopes.1 - 16.1).abs() < 0.05);
        assert_eq!(k.kind, KnotKind::Persistent);
    }

    #[test]
    fn tangential_contact() {
        let mut k = principal_knot();
        k.slopes = (4.0 * PI, 0.0);
        assert_eq!(classify_knot(&k), KnotKind::Tangential);
        k.slopes = (4.0 * PI, -4.0 * PI);
        assert_eq!(classify_knot(&k), KnotKind::Disintegrating);
    }

    #[test]
    fn closed_form_spectrum_at_zero() {
        let s = closed_form_spectrum(ELL, 0.0, 6);
        let expected = [0.0, 4.0 * PI * PI, 4.0 * PI * PI, PI * PI / 0.16, 4.0 * PI * PI + PI * PI / 0.16, 4.0 * PI * PI + PI * PI / 0.16];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn conjugate_symmetry(j in -5i32..5, k in 0u32..5, eta in -PI..PI, ell in 0.05f64..1.0) {
                let a = mu_jk(ModeIndex::new(j, k), eta, ell);
                let b = mu_jk(ModeIndex::new(-j, k), -eta, ell);
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            }

            #[test]
            fn periodic_consistency(j in -5i32..5, k in 0u32..5, ell in 0.05f64..1.0) {
                let a = mu_jk(ModeIndex::new(j, k), PI, ell);
                let b = mu_jk(ModeIndex::new(j + 1, k), -PI, ell);
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            }

            #[test]
            fn knots_mirror_under_eta_reflection(ell in 0.1f64..0.5, mu_max in 1.0f64..150.0) {
                let knots = enumerate_knots(ell, mu_max);
                for k in &knots {
                    let ma = ModeIndex::new(-k.branch_a.j, k.branch_a.k);
                    let mb = ModeIndex::new(-k.branch_b.j, k.branch_b.k);
                    let found = knots.iter().any(|m| {
                        (m.eta_star + k.eta_star).abs() < 1e-9
                            && (m.mu_star - k.mu_star).abs() < 1e-9 * k.mu_star.max(1.0)
                            && ((m.branch_a == ma && m.branch_b == mb) || (m.branch_a == mb && m.branch_b == ma))
                    });
                    prop_assert!(found);
                }
            }

            #[test]
            fn disintegrating_iff_opposite_slopes(ell in 0.1f64..0.5, mu_max in 1.0f64..150.0) {
                for k in enumerate_knots(ell, mu_max) {
                    let sa = k.branch_a.slope(k.eta_star);
                    let sb = k.branch_b.slope(k.eta_star);
                    prop_assert_eq!(k.slopes, (sa, sb));
                    if k.kind == KnotKind::Disintegrating {
                        prop_assert!(sa * sb < 0.0);
                    }
                }
            }
        }
    }
}
