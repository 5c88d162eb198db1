//! Element matrices of linear Lagrange triangles.

/// Signed area of the triangle `(a, b, c)`; positive when counterclockwise.
pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Stiffness matrix `∫ ∇φ_a · ∇φ_b` and the (unsigned) area.
pub fn stiffness(p: [[f64; 2]; 3]) -> ([[f64; 3]; 3], f64) {
    let area = signed_area(p[0], p[1], p[2]).abs();
    // gradient of φ_a is (y_b - y_c, x_c - x_b) / 2A up to orientation sign,
    // which cancels in the products
    let g = [
        [p[1][1] - p[2][1], p[2][0] - p[1][0]],
        [p[2][1] - p[0][1], p[0][0] - p[2][0]],
        [p[0][1] - p[1][1], p[1][0] - p[0][0]],
    ];
    let mut k = [[0.0; 3]; 3];
    let s = 1.0 / (4.0 * area);
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = s * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
    }
    (k, area)
}

/// Consistent mass matrix `∫ φ_a φ_b = A(1 + δ_ab)/12`.
pub fn mass(area: f64) -> [[f64; 3]; 3] {
    let off = area / 12.0;
    let diag = area / 6.0;
    [[diag, off, off], [off, diag, off], [off, off, diag]]
}

/// Interior angles in radians.
pub fn angles(p: [[f64; 2]; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let c = p[(i + 2) % 3];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cross = u[0] * v[1] - u[1] * v[0];
        let dot = u[0] * v[0] + u[1] * v[1];
        out[i] = cross.abs().atan2(dot);
    }
    out
}

pub fn centroid(p: [[f64; 2]; 3]) -> [f64; 2] {
    [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: [[f64; 2]; 3] = [[0.1, -0.2], [1.3, 0.4], [0.2, 0.9]];

    #[test]
    fn stiffness_annihilates_constants_and_reproduces_energy() {
        let (k, area) = stiffness(TRI);
        for row in &k {
            assert!(row.iter().sum::<f64>().abs() < 1e-14);
        }
        // u = 2x - 3y has energy |∇u|² A = 13 A
        let u: Vec<f64> = TRI.iter().map(|p| 2.0 * p[0] - 3.0 * p[1]).collect();
        let mut e = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                e += u[a] * k[a][b] * u[b];
            }
        }
        assert!((e - 13.0 * area).abs() < 1e-13);
    }

    #[test]
    fn mass_integrates_one_and_x() {
        let area = signed_area(TRI[0], TRI[1], TRI[2]).abs();
        let m = mass(area);
        let total: f64 = m.iter().flatten().sum();
        assert!((total - area).abs() < 1e-15);
        let x: Vec<f64> = TRI.iter().map(|p| p[0]).collect();
        let ones_m_x: f64 = (0..3).map(|a| (0..3).map(|b| m[a][b] * x[b]).sum::<f64>()).sum();
        assert!((ones_m_x - area * centroid(TRI)[0]).abs() < 1e-15);
    }

    #[test]
    fn angles_sum_to_pi() {
        let s: f64 = angles(TRI).iter().sum();
        assert!((s - std::f64::consts::PI).abs() < 1e-14);
    }
}
