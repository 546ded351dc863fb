use std::fmt;

use serde::{Deserialize, Serialize};

use crate::reconstruction::Point4;

const COORDS: [&str; 4] = ["t", "x1", "x2", "x3"];

/// A vector field `Σᵢ Xⁱ(p) ∂ᵢ` on `(t, x₁, x₂, x₃)` with affine
/// coefficients `Xⁱ(p) = cᵢ₀ + Σⱼ cᵢ,ⱼ₊₁ pⱼ`.
///
/// Row `i` of `coefficients` holds the component along `∂t, ∂x₁, ∂x₂, ∂x₃`;
/// column 0 is the constant term and columns 1..=4 the coefficients of
/// `t, x₁, x₂, x₃`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineVectorField {
    pub coefficients: [[f64; 5]; 4],
}

impl AffineVectorField {
    pub const ZERO: Self = Self {
        coefficients: [[0.0; 5]; 4],
    };

    /// Constant field `Σ cᵢ ∂ᵢ`.
    pub fn translation(c: [f64; 4]) -> Self {
        let mut f = Self::ZERO;
        for i in 0..4 {
            f.coefficients[i][0] = c[i];
        }
        f
    }

    /// Component `i` at `p`.
    pub fn component(&self, i: usize, p: &Point4) -> f64 {
        let x = p.to_array();
        let row = &self.coefficients[i];
        row[0] + row[1] * x[0] + row[2] * x[1] + row[3] * x[2] + row[4] * x[3]
    }

    pub fn at(&self, p: &Point4) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.component(i, p))
    }

    /// Constant part `b` and linear part `A` of `X(p) = b + A p`.
    pub fn split(&self) -> ([f64; 4], [[f64; 4]; 4]) {
        let mut b = [0.0; 4];
        let mut a = [[0.0; 4]; 4];
        for i in 0..4 {
            b[i] = self.coefficients[i][0];
            for j in 0..4 {
                a[i][j] = self.coefficients[i][j + 1];
            }
        }
        (b, a)
    }

    fn from_split(b: [f64; 4], a: [[f64; 4]; 4]) -> Self {
        let mut f = Self::ZERO;
        for i in 0..4 {
            f.coefficients[i][0] = b[i];
            for j in 0..4 {
                f.coefficients[i][j + 1] = a[i][j];
            }
        }
        f
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut f = *self;
        f.coefficients.iter_mut().flatten().for_each(|c| *c *= s);
        f
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut f = *self;
        for (a, b) in f.coefficients.iter_mut().flatten().zip(other.coefficients.iter().flatten()) {
            *a += b;
        }
        f
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        self.add(&other.scale(s))
    }

    /// Coefficients flattened row by row.
    pub fn to_vector(&self) -> [f64; 20] {
        let mut v = [0.0; 20];
        for (k, c) in self.coefficients.iter().flatten().enumerate() {
            v[k] = *c;
        }
        v
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().flatten().all(|&c| c == 0.0)
    }
}

impl fmt::Display for AffineVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, row) in self.coefficients.iter().enumerate() {
            let mut parts = Vec::new();
            if row[0] != 0.0 {
                parts.push(format!("{}", row[0]));
            }
            for j in 0..4 {
                let c = row[j + 1];
                if c == 1.0 {
                    parts.push(COORDS[j].to_string());
                } else if c == -1.0 {
                    parts.push(format!("-{}", COORDS[j]));
                } else if c != 0.0 {
                    parts.push(format!("{c}{}", COORDS[j]));
                }
            }
            match parts.len() {
                0 => {}
                1 if parts[0] == "1" => terms.push(format!("d/d{}", COORDS[i])),
                1 => terms.push(format!("{} d/d{}", parts[0], COORDS[i])),
                _ => terms.push(format!("({}) d/d{}", parts.join(" + "), COORDS[i])),
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Lie bracket `[X, Y]ⁱ = X(Yⁱ) − Y(Xⁱ)`.
///
/// For `X = a + A p` and `Y = b + B p` this is `(B a − A b) + (B A − A B) p`,
/// so integer coefficients give exact results.
pub fn commutator(x: &AffineVectorField, y: &AffineVectorField) -> AffineVectorField {
    let (a, am) = x.split();
    let (b, bm) = y.split();
    let mut c = [0.0; 4];
    let mut cm = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            c[i] += bm[i][k] * a[k] - am[i][k] * b[k];
            for j in 0..4 {
                cm[i][j] += bm[i][k] * am[k][j] - am[i][k] * bm[k][j];
            }
        }
    }
    AffineVectorField::from_split(c, cm)
}

/// Named generators of the symmetry algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    #[serde(rename = "P_t")]
    Pt,
    P1,
    P2,
    P3,
    J12,
    D,
}

impl Generator {
    pub const ALL: [Generator; 6] = [Generator::Pt, Generator::P1, Generator::P2, Generator::P3, Generator::J12, Generator::D];

    pub fn field(self) -> AffineVectorField {
        let mut f = AffineVectorField::ZERO;
        let c = &mut f.coefficients;
        match self {
            Generator::Pt => c[0][0] = 1.0,
            Generator::P1 => c[1][0] = 1.0,
            Generator::P2 => c[2][0] = 1.0,
            Generator::P3 => c[3][0] = 1.0,
            // x₂∂₁ − x₁∂₂
            Generator::J12 => {
                c[1][3] = 1.0;
                c[2][2] = -1.0;
            }
            // 2t∂t + xᵢ∂ᵢ
            Generator::D => {
                c[0][1] = 2.0;
                c[1][2] = 1.0;
                c[2][3] = 1.0;
                c[3][4] = 1.0;
            }
        }
        f
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::Pt => "P_t",
            Generator::P1 => "P1",
            Generator::P2 => "P2",
            Generator::P3 => "P3",
            Generator::J12 => "J12",
            Generator::D => "D",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Time dependence of the flux, as far as the symmetry group is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxKind {
    Arbitrary,
    InverseSqrt,
    Constant,
}

/// Generators of the maximal invariance algebra for the given flux kind.
pub fn generators_for(kind: FluxKind) -> Vec<Generator> {
    let mut g = vec![Generator::P1, Generator::P2, Generator::P3, Generator::J12];
    match kind {
        FluxKind::Arbitrary => {}
        FluxKind::InverseSqrt => g.push(Generator::D),
        FluxKind::Constant => g.push(Generator::Pt),
    }
    g
}

/// Fields of [`generators_for`].
pub fn generators(kind: FluxKind) -> Vec<AffineVectorField> {
    generators_for(kind).into_iter().map(Generator::field).collect()
}

type Mat5 = [[f64; 5]; 5];

fn mat_mul(a: &Mat5, b: &Mat5) -> Mat5 {
    let mut c = [[0.0; 5]; 5];
    for i in 0..5 {
        for k in 0..5 {
            if a[i][k] != 0.0 {
                for j in 0..5 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

fn identity5() -> Mat5 {
    let mut m = [[0.0; 5]; 5];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

/// `exp(M)` by scaling and squaring with a degree-20 Taylor polynomial.
fn expm(m: &Mat5) -> Mat5 {
    let norm = m.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 0.5_f64.powi(squarings as i32);
    let mut a = *m;
    a.iter_mut().flatten().for_each(|x| *x *= scale);
    let mut result = identity5();
    let mut term = identity5();
    for k in 1..=20 {
        term = mat_mul(&term, &a);
        let inv = 1.0 / k as f64;
        term.iter_mut().flatten().for_each(|x| *x *= inv);
        for (r, t) in result.iter_mut().flatten().zip(term.iter().flatten()) {
            *r += t;
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

/// `expm1(x)/x`, continuous at 0.
fn phi1(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// Matrix of the group element `exp(εX)` acting on `(t, x₁, x₂, x₃, 1)`.
///
/// Translations, diagonal fields (such as `D`) and rotations about the `x₃`
/// axis plus a translation along `t, x₃` use closed forms; other fields use
/// the matrix exponential of the augmented 5×5 representation.
/// `J₁₂ = x₂∂₁ − x₁∂₂` turns `(x₁, x₂)` clockwise: `(1, 0) ↦ (cos ε, −sin ε)`.
pub fn flow_matrix(x: &AffineVectorField, epsilon: f64) -> [[f64; 5]; 5] {
    let (b, a) = x.split();
    let off_diagonal_zero = (0..4).all(|i| (0..4).all(|j| i == j || a[i][j] == 0.0));
    let mut m = identity5();
    if off_diagonal_zero {
        for i in 0..4 {
            let d = a[i][i] * epsilon;
            m[i][i] = d.exp();
            m[i][4] = b[i] * epsilon * phi1(d);
        }
        return m;
    }
    let rotation_only = (0..4).all(|i| {
        (0..4).all(|j| matches!((i, j), (1, 2) | (2, 1)) || a[i][j] == 0.0)
    }) && a[1][2] == -a[2][1]
        && b[1] == 0.0
        && b[2] == 0.0;
    if rotation_only {
        let (s, c) = (a[1][2] * epsilon).sin_cos();
        m[1][1] = c;
        m[1][2] = s;
        m[2][1] = -s;
        m[2][2] = c;
        m[0][4] = b[0] * epsilon;
        m[3][4] = b[3] * epsilon;
        return m;
    }
    let mut gen = [[0.0; 5]; 5];
    for i in 0..4 {
        gen[i][4] = b[i] * epsilon;
        for j in 0..4 {
            gen[i][j] = a[i][j] * epsilon;
        }
    }
    expm(&gen)
}

/// Image of `point` under the one-parameter group generated by `x`.
pub fn flow(x: &AffineVectorField, epsilon: f64, point: &Point4) -> Point4 {
    apply_matrix(&flow_matrix(x, epsilon), point)
}

pub(crate) fn apply_matrix(m: &[[f64; 5]; 5], p: &Point4) -> Point4 {
    let v = p.to_array();
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = m[i][4] + (0..4).map(|j| m[i][j] * v[j]).sum::<f64>();
    }
    Point4::from_array(out)
}

/// Rank of a set of fields, counting pivots above `rel_tol·max|coefficient|`.
pub fn rank(fields: &[AffineVectorField], rel_tol: f64) -> usize {
    let mut rows: Vec<[f64; 20]> = fields.iter().map(|f| f.to_vector()).collect();
    let scale = rows.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    for col in 0..20 {
        if rank == rows.len() {
            break;
        }
        let pivot = (rank..rows.len())
            .max_by(|&i, &j| rows[i][col].abs().total_cmp(&rows[j][col].abs()))
            .expect("nonempty range");
        if rows[pivot][col].abs() <= tol {
            continue;
        }
        rows.swap(rank, pivot);
        let p = rows[rank];
        for row in rows.iter_mut().skip(rank + 1) {
            let f = row[col] / p[col];
            if f != 0.0 {
                for k in col..20 {
                    row[k] -= f * p[k];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Coordinates of `target` in a linearly independent `basis`, or `None`
/// if the least-squares remainder exceeds `rel_tol` relative to `target`.
pub fn decompose(target: &AffineVectorField, basis: &[AffineVectorField], rel_tol: f64) -> Option<Vec<f64>> {
    let n = basis.len();
    let vecs: Vec<[f64; 20]> = basis.iter().map(|f| f.to_vector()).collect();
    let t = target.to_vector();
    let dot = |a: &[f64; 20], b: &[f64; 20]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // Normal equations with Gaussian elimination; n ≤ 6.
    let mut g = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = dot(&vecs[i], &vecs[j]);
        }
        g[i][n] = dot(&vecs[i], &t);
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| g[i][col].abs().total_cmp(&g[j][col].abs()))?;
        if g[pivot][col] == 0.0 {
            return None;
        }
        g.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = g[r][col] / g[col][col];
                for k in col..=n {
                    g[r][k] -= f * g[col][k];
                }
            }
        }
    }
    let coeffs: Vec<f64> = (0..n).map(|i| g[i][n] / g[i][i]).collect();
    let mut rem = *target;
    for (c, f) in coeffs.iter().zip(basis) {
        rem = rem.add_scaled(-c, f);
    }
    let scale = target.max_abs().max(basis.iter().map(|f| f.max_abs()).fold(0.0, f64::max));
    (rem.max_abs() <= rel_tol * scale.max(f64::MIN_POSITIVE)).then_some(coeffs)
}

/// Structure constants `c[i][j][k]` with `[eᵢ, eⱼ] = Σₖ c[i][j][k] eₖ`, or
/// `None` if some bracket leaves the span.
pub fn structure_constants(basis: &[AffineVectorField], rel_tol: f64) -> Option<Vec<Vec<Vec<f64>>>> {
    basis
        .iter()
        .map(|x| basis.iter().map(|y| decompose(&commutator(x, y), basis, rel_tol)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Generator::*;

    fn g(x: Generator) -> AffineVectorField {
        x.field()
    }

    #[test]
    fn hand_derived_brackets() {
        assert!(commutator(&g(P1), &g(P2)).is_zero());
        assert_eq!(commutator(&g(J12), &g(P1)), g(P2));
        assert_eq!(commutator(&g(J12), &g(P2)), g(P1).scale(-1.0));
        assert_eq!(commutator(&g(D), &g(Pt)), g(Pt).scale(-2.0));
        for p in [P1, P2, P3] {
            assert_eq!(commutator(&g(D), &g(p)), g(p).scale(-1.0));
        }
        assert!(commutator(&g(D), &g(J12)).is_zero());
    }

    #[test]
    fn direct_sum_decomposition() {
        let blocks: [&[Generator]; 3] = [&[P1, P2, J12], &[P3], &[Pt]];
        for (i, a) in blocks.iter().enumerate() {
            for b in blocks.iter().skip(i + 1) {
                for x in *a {
                    for y in *b {
                        assert!(commutator(&g(*x), &g(*y)).is_zero(), "{x} {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn antisymmetry_and_jacobi_are_exact() {
        for x in Generator::ALL {
            for y in Generator::ALL {
                let (xy, yx) = (commutator(&g(x), &g(y)), commutator(&g(y), &g(x)));
                assert_eq!(xy, yx.scale(-1.0));
                for z in Generator::ALL {
                    let j = commutator(&g(x), &commutator(&g(y), &g(z)))
                        .add(&commutator(&g(y), &commutator(&g(z), &g(x))))
                        .add(&commutator(&g(z), &commutator(&g(x), &g(y))));
                    assert!(j.is_zero());
                }
            }
        }
    }

    #[test]
    fn algebra_depends_on_flux() {
        assert_eq!(generators(FluxKind::Arbitrary).len(), 4);
        assert_eq!(generators_for(FluxKind::Constant).last(), Some(&Pt));
        assert_eq!(generators_for(FluxKind::InverseSqrt).last(), Some(&D));
    }

    #[test]
    fn flow_examples() {
        let p = Point4::new(0.3, 1.0, 2.0, 3.0);
        assert_eq!(flow(&g(P3), 0.25, &p), Point4::new(0.3, 1.0, 2.0, 3.25));
        let q = flow(&g(J12), std::f64::consts::FRAC_PI_2, &Point4::new(0.3, 1.0, 0.0, 0.0));
        assert!((q.x1).abs() < 1e-16 && (q.x2 + 1.0).abs() < 1e-16);
        assert_eq!((q.t, q.x3), (0.3, 0.0));
        let e = 0.4_f64;
        let d = flow(&g(D), e, &Point4::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(d, Point4::new((2.0 * e).exp(), e.exp(), e.exp(), e.exp()));
    }

    #[test]
    fn general_exponential_matches_closed_form() {
        // J12 + P1 is not covered by a closed form; compare with J12 conjugated.
        let x = g(J12).add(&g(P1));
        let p = Point4::new(0.0, 0.5, -0.2, 1.0);
        let eps = 1.3_f64;
        // Fixed point of X: x₂ = −1, x₁ = 0; rotate about it.
        let (s, c) = eps.sin_cos();
        let (u1, u2) = (p.x1, p.x2 + 1.0);
        let expected = Point4::new(0.0, c * u1 + s * u2, -s * u1 + c * u2 - 1.0, 1.0);
        let got = flow(&x, eps, &p);
        for (a, b) in got.to_array().iter().zip(expected.to_array()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_and_decompose() {
        let basis = [g(P1), g(P2), g(J12)];
        assert_eq!(rank(&basis, 1e-12), 3);
        assert_eq!(rank(&[g(P1), g(P1).scale(2.0)], 1e-12), 1);
        let c = decompose(&g(P2).scale(3.0).add(&g(J12)), &basis, 1e-12).unwrap();
        assert_eq!(c, vec![0.0, 3.0, 1.0]);
        assert!(decompose(&g(P3), &basis, 1e-12).is_none());
        let sc = structure_constants(&basis, 1e-12).unwrap();
        assert_eq!(sc[2][0], vec![0.0, 1.0, 0.0]);
    }

    fn arb_field() -> impl Strategy<Value = AffineVectorField> {
        prop::array::uniform6(-1.5f64..1.5).prop_map(|c| {
            Generator::ALL.iter().zip(c).fold(AffineVectorField::ZERO, |acc, (g, c)| acc.add_scaled(c, &g.field()))
        })
    }

    proptest! {
        #[test]
        fn flow_is_a_group(
            x in arb_field(), a in -1.5f64..1.5, b in -1.5f64..1.5,
            p in prop::array::uniform4(-3.0f64..3.0),
        ) {
            let p = Point4::from_array(p);
            let two = flow(&x, a, &flow(&x, b, &p));
            let one = flow(&x, a + b, &p);
            let scale = 1.0 + one.to_array().iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            for (u, v) in two.to_array().iter().zip(one.to_array()) {
                prop_assert!((u - v).abs() <= 1e-13 * scale, "{} vs {}", u, v);
            }
        }

        #[test]
        fn bracket_is_bilinear_and_antisymmetric(x in arb_field(), y in arb_field(), z in arb_field(), s in -2.0f64..2.0) {
            let lhs = commutator(&x.add_scaled(s, &y), &z);
            let rhs = commutator(&x, &z).add_scaled(s, &commutator(&y, &z));
            prop_assert!(lhs.add_scaled(-1.0, &rhs).max_abs() <= 1e-13);
            prop_assert!(commutator(&x, &y).add(&commutator(&y, &x)).max_abs() <= 1e-15);
        }

        #[test]
        fn flow_follows_the_field(x in arb_field(), p in prop::array::uniform4(-2.0f64..2.0)) {
            let p = Point4::from_array(p);
            let h = 1e-5;
            let (fw, bw) = (flow(&x, h, &p), flow(&x, -h, &p));
            let v = x.at(&p);
            for i in 0..4 {
                let d = (fw.to_array()[i] - bw.to_array()[i]) / (2.0 * h);
                prop_assert!((d - v[i]).abs() <= 1e-8 * (1.0 + v[i].abs()) * 10.0);
            }
        }
    }
}
