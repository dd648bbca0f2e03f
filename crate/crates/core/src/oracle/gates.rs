//! Unitary table for the native gate names the simulator understands.
//!
//! Matrices are row-major. For a two-qubit gate on `[q0, q1]` the local basis
//! index is `2·bit(q0) + bit(q1)`, so `cx` on `[c, t]` has the textbook form.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

const O: Complex64 = Complex64::new(0.0, 0.0);
const I1: Complex64 = Complex64::new(1.0, 0.0);
const IM: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag2(a: Complex64, b: Complex64) -> Vec<Complex64> {
    vec![a, O, O, b]
}

fn rx(theta: f64) -> Vec<Complex64> {
    let (s, co) = (theta / 2.0).sin_cos();
    vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
}

fn ry(theta: f64) -> Vec<Complex64> {
    let (s, co) = (theta / 2.0).sin_cos();
    vec![c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]
}

fn rz(theta: f64) -> Vec<Complex64> {
    diag2(
        Complex64::from_polar(1.0, -theta / 2.0),
        Complex64::from_polar(1.0, theta / 2.0),
    )
}

/// `(arity, number of parameters)` for every supported gate.
pub fn signature(name: &str) -> Option<(usize, usize)> {
    Some(match name {
        "id" | "x" | "y" | "z" | "h" | "s" | "sdg" | "t" | "tdg" | "sx" | "sxdg" => (1, 0),
        "rx" | "ry" | "rz" | "p" | "u1" => (1, 1),
        "u" | "u3" => (1, 3),
        "cx" | "cz" | "swap" | "ecr" => (2, 0),
        "rzz" | "cp" => (2, 1),
        _ => return None,
    })
}

/// The unitary for `name`, or `None` when the name or parameter count is not
/// in the table.
pub fn unitary(name: &str, params: &[f64]) -> Option<Vec<Complex64>> {
    let (_, np) = signature(name)?;
    if params.len() != np {
        return None;
    }
    let h = FRAC_1_SQRT_2;
    let m = match name {
        "id" => diag2(I1, I1),
        "x" => vec![O, I1, I1, O],
        "y" => vec![O, -IM, IM, O],
        "z" => diag2(I1, -I1),
        "h" => vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
        "s" => diag2(I1, IM),
        "sdg" => diag2(I1, -IM),
        "t" => diag2(I1, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        "tdg" => diag2(I1, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
        "sx" => vec![c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)],
        "sxdg" => vec![c(0.5, -0.5), c(0.5, 0.5), c(0.5, 0.5), c(0.5, -0.5)],
        "rx" => rx(params[0]),
        "ry" => ry(params[0]),
        "rz" => rz(params[0]),
        "p" | "u1" => diag2(I1, Complex64::from_polar(1.0, params[0])),
        "u" | "u3" => {
            let (theta, phi, lam) = (params[0], params[1], params[2]);
            let (s, co) = (theta / 2.0).sin_cos();
            vec![
                c(co, 0.0),
                -Complex64::from_polar(s, lam),
                Complex64::from_polar(s, phi),
                Complex64::from_polar(co, phi + lam),
            ]
        }
        "cx" => vec![
            I1, O, O, O, //
            O, I1, O, O, //
            O, O, O, I1, //
            O, O, I1, O,
        ],
        "cz" => vec![
            I1, O, O, O, //
            O, I1, O, O, //
            O, O, I1, O, //
            O, O, O, -I1,
        ],
        "swap" => vec![
            I1, O, O, O, //
            O, O, I1, O, //
            O, I1, O, O, //
            O, O, O, I1,
        ],
        "ecr" => {
            let a = c(h, 0.0);
            let b = c(0.0, h);
            vec![
                O, O, a, b, //
                O, O, b, a, //
                a, -b, O, O, //
                -b, a, O, O,
            ]
        }
        "rzz" => {
            let e = Complex64::from_polar(1.0, -params[0] / 2.0);
            let f = Complex64::from_polar(1.0, params[0] / 2.0);
            vec![
                e, O, O, O, //
                O, f, O, O, //
                O, O, f, O, //
                O, O, O, e,
            ]
        }
        "cp" => vec![
            I1,
            O,
            O,
            O, //
            O,
            I1,
            O,
            O, //
            O,
            O,
            I1,
            O, //
            O,
            O,
            O,
            Complex64::from_polar(1.0, params[0]),
        ],
        _ => return None,
    };
    Some(m)
}

/// `a · b` for square row-major matrices of side `d`.
pub fn matmul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![O; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == O {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

pub fn dagger(a: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![O; d * d];
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = a[i * d + j].conj();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const NAMES: [(&str, &[f64]); 20] = [
        ("id", &[]),
        ("x", &[]),
        ("y", &[]),
        ("z", &[]),
        ("h", &[]),
        ("s", &[]),
        ("sdg", &[]),
        ("t", &[]),
        ("tdg", &[]),
        ("sx", &[]),
        ("sxdg", &[]),
        ("rx", &[0.3]),
        ("ry", &[1.1]),
        ("rz", &[-2.0]),
        ("u", &[0.4, 1.3, -0.7]),
        ("cx", &[]),
        ("cz", &[]),
        ("swap", &[]),
        ("ecr", &[]),
        ("rzz", &[0.9]),
    ];

    fn close(a: &[Complex64], b: &[Complex64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    fn identity(d: usize) -> Vec<Complex64> {
        (0..d * d)
            .map(|k| if k % (d + 1) == 0 { I1 } else { O })
            .collect()
    }

    #[test]
    fn table_entries_are_unitary() {
        for (name, params) in NAMES {
            let u = unitary(name, params).unwrap();
            let d = if u.len() == 4 { 2 } else { 4 };
            assert!(
                close(&matmul(&u, &dagger(&u, d), d), &identity(d)),
                "{name}"
            );
        }
    }

    #[test]
    fn sx_squares_to_x() {
        let sx = unitary("sx", &[]).unwrap();
        assert!(close(&matmul(&sx, &sx, 2), &unitary("x", &[]).unwrap()));
    }

    #[test]
    fn rz_sx_rz_is_hadamard_up_to_phase() {
        let rzh = unitary("rz", &[FRAC_PI_2]).unwrap();
        let sx = unitary("sx", &[]).unwrap();
        let m = matmul(&rzh, &matmul(&sx, &rzh, 2), 2);
        let h = unitary("h", &[]).unwrap();
        let phase = m[0] / h[0];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        let scaled: Vec<_> = h.iter().map(|x| x * phase).collect();
        assert!(close(&m, &scaled));
    }

    #[test]
    fn wrong_arity_is_rejected() {
        assert!(unitary("rx", &[]).is_none());
        assert!(unitary("x", &[1.0]).is_none());
        assert!(unitary("frobnicate", &[]).is_none());
    }
}
