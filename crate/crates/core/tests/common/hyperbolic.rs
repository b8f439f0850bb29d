//! Numeric oracle: closed geodesics of a genus-g surface drawn in the regular
//! 4g-gon of the Poincaré disc. Used only to validate the combinatorial
//! crossing engine.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use std::f64::consts::PI;

use sft_lab::surface::{Letter, SurfaceGroup};

pub const TOL: f64 = 1e-9;

/// Möbius map z ↦ (a z + b) / (conj(b) z + conj(a)) preserving the disc.
#[derive(Clone, Copy, Debug)]
pub struct Mobius {
    a: C,
    b: C,
}

impl Mobius {
    fn identity() -> Self {
        Mobius { a: C::new(1.0, 0.0), b: C::new(0.0, 0.0) }
    }
    fn rotation(theta: f64) -> Self {
        Mobius { a: C::from_polar(1.0, theta / 2.0), b: C::new(0.0, 0.0) }
    }
    /// Hyperbolic translation by distance t along the diameter at angle phi.
    fn translation(phi: f64, t: f64) -> Self {
        let r = Mobius::rotation(phi);
        let m = Mobius { a: C::new((t / 2.0).cosh(), 0.0), b: C::new((t / 2.0).sinh(), 0.0) };
        r.compose(&m).compose(&Mobius::rotation(-phi))
    }
    pub fn compose(&self, o: &Mobius) -> Mobius {
        Mobius { a: self.a * o.a + self.b * o.b.conj(), b: self.a * o.b + self.b * o.a.conj() }
    }
    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.a.conj(), b: -self.b }
    }
    pub fn apply(&self, z: C) -> C {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }
    pub fn distance_from_identity(&self) -> f64 {
        ((self.a - C::new(1.0, 0.0)).norm().min((self.a + C::new(1.0, 0.0)).norm())) + self.b.norm()
    }
    /// Attracting and repelling fixed points on the unit circle.
    pub fn axis(&self) -> (C, C) {
        // Fixed points of (a z + b)/(b̄ z + ā): b̄ z² + (ā − a) z − b = 0.
        let qa = self.b.conj();
        let qb = self.a.conj() - self.a;
        let qc = -self.b;
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        let z1 = (-qb + disc) / (2.0 * qa);
        let z2 = (-qb - disc) / (2.0 * qa);
        // Derivative at a fixed point: 1 / (b̄ z + ā)².
        let deriv = |z: C| (1.0 / (self.b.conj() * z + self.a.conj()).powu(2)).norm();
        if deriv(z1) < deriv(z2) {
            (z2, z1)
        } else {
            (z1, z2)
        }
    }
}

/// Oriented geodesic from `from` to `to` on the unit circle, parametrised by
/// the real coordinate after a Möbius map sending it to the diameter (−1, 1).
#[derive(Clone, Copy, Debug)]
pub struct Geodesic {
    pub from: C,
    pub to: C,
    to_axis: Mobius,
}

impl Geodesic {
    pub fn new(from: C, to: C) -> Self {
        // Rotate so that the geodesic is symmetric about the real axis, then
        // translate its midpoint to the origin.
        let mid = (from + to) / 2.0;
        let phi = if mid.norm() < 1e-14 { (to / from).arg() / 2.0 + from.arg() } else { mid.arg() };
        let rot = Mobius::rotation(-phi);
        let (f, t) = (rot.apply(from), rot.apply(to));
        // Geodesic now crosses the real axis at x0 perpendicularly; translate x0 to 0.
        let x0 = if mid.norm() < 1e-14 { 0.0 } else { crossing_of_real_axis(f, t) };
        let dist = 2.0 * x0.atanh();
        let tr = Mobius::translation(0.0, -dist);
        let rot2 = Mobius::rotation(-(tr.apply(t)).arg() + PI / 2.0);
        let m = rot2.compose(&tr).compose(&rot);
        // Now the geodesic is the imaginary diameter; turn it onto the real one.
        let fix = Mobius::rotation(-PI / 2.0).compose(&m);
        let g = Geodesic { from, to, to_axis: fix };
        debug_assert!((g.to_axis.apply(to) - C::new(1.0, 0.0)).norm() < 1e-6);
        g
    }
    pub fn param(&self, z: C) -> f64 {
        self.to_axis.apply(z).re
    }
    pub fn point(&self, x: f64) -> C {
        self.to_axis.inverse().apply(C::new(x, 0.0))
    }
    pub fn tangent(&self, x: f64) -> C {
        let h = 1e-6 * (1.0 - x * x).max(1e-12);
        self.point(x + h) - self.point(x - h)
    }
    pub fn image(&self, m: &Mobius) -> Geodesic {
        Geodesic::new(m.apply(self.from), m.apply(self.to))
    }
    /// Parameter on self of the intersection with the geodesic (p, q), if any.
    pub fn meet(&self, p: C, q: C) -> Option<f64> {
        let (p, q) = (self.to_axis.apply(p), self.to_axis.apply(q));
        if p.im * q.im >= 0.0 {
            return None;
        }
        Some(crossing_of_real_axis(p, q))
    }
}

/// Real coordinate where the geodesic between two unit-circle points in
/// opposite half-planes crosses the real diameter.
fn crossing_of_real_axis(p: C, q: C) -> f64 {
    let denom = 1.0 + (p * q.conj()).re;
    if denom.abs() < 1e-14 {
        // Diameter through the origin.
        return 0.0;
    }
    let c = (p + q) / denom;
    let rho2 = c.norm_sqr() - 1.0;
    // Solve (x − c.re)² + c.im² = rho2 for x in (−1, 1).
    let disc = (rho2 - c.im * c.im).max(0.0).sqrt();
    let x1 = c.re - disc;
    let x2 = c.re + disc;
    if x1.abs() < 1.0 {
        x1
    } else {
        x2
    }
}

pub struct Polygon {
    pub group: SurfaceGroup,
    pub n: usize,
    pub labels: Vec<Letter>,
    pub gens: Vec<Mobius>,
    /// Side geodesics as endpoint pairs on the unit circle.
    pub sides: Vec<(C, C)>,
}

impl Polygon {
    pub fn new(group: SurfaceGroup) -> Self {
        let labels = group.rotation();
        let n = labels.len();
        let inradius = (1.0 / (PI / n as f64).tan()).acosh();
        let phi = |k: usize| 2.0 * PI * k as f64 / n as f64;
        let gens = (0..n)
            .map(|k| {
                let s = labels.iter().position(|&x| x == -labels[k]).unwrap();
                Mobius::translation(phi(k), 2.0 * inradius).compose(&Mobius::rotation(phi(k) + PI - phi(s)))
            })
            .collect();
        // Side k is perpendicular to the ray at phi(k); its ideal endpoints
        // are at angles phi(k) ± half-angle with cos(half) = tanh(inradius).
        let half = (inradius.tanh()).acos();
        let sides = (0..n).map(|k| (C::from_polar(1.0, phi(k) - half), C::from_polar(1.0, phi(k) + half))).collect();
        Polygon { group, n, labels, gens, sides }
    }

    pub fn gen(&self, x: Letter) -> Mobius {
        self.gens[self.labels.iter().position(|&y| y == x).unwrap()]
    }

    pub fn word(&self, w: &[Letter]) -> Mobius {
        w.iter().fold(Mobius::identity(), |m, &x| m.compose(&self.gen(x)))
    }

    /// Side index whose half-plane excludes z, if z is outside the polygon.
    fn violated_side(&self, z: C) -> Option<usize> {
        let mut worst = None;
        let mut worst_depth = 0.0;
        for (k, &(p, q)) in self.sides.iter().enumerate() {
            let c = (p + q) / (1.0 + (p * q.conj()).re);
            let rho = (c.norm_sqr() - 1.0).sqrt();
            let depth = rho - (z - c).norm();
            if depth > worst_depth {
                worst_depth = depth;
                worst = Some(k);
            }
        }
        worst
    }
}

/// A chord of the closed geodesic inside the polygon, with the letter of
/// the side through which it leaves.
#[derive(Clone, Copy, Debug)]
pub struct Chord {
    pub geo: Geodesic,
    pub start: f64,
    pub end: f64,
    pub exit: Letter,
}

/// Cuts the closed geodesic of the word into chords of the fundamental polygon.
/// Returns None when the geodesic runs through a polygon vertex.
pub fn chords(poly: &Polygon, w: &[Letter]) -> Option<Vec<Chord>> {
    let m = poly.word(w);
    let (rep, att) = m.axis();
    let mut geo = Geodesic::new(rep, att);
    // Move the point of the axis closest to the origin into the polygon.
    let mut x = geo.param(C::new(0.0, 0.0));
    let mut z = geo.point(x.clamp(-0.999999, 0.999999));
    for _ in 0..10_000 {
        match poly.violated_side(z) {
            None => break,
            Some(k) => {
                let g = poly.gens[k].inverse();
                geo = geo.image(&g);
                z = g.apply(z);
            }
        }
    }
    x = geo.param(z);
    // Entry point: last side crossing before x.
    let mut start = -1.0;
    for &(p, q) in &poly.sides {
        if let Some(t) = geo.meet(p, q) {
            if t < x - TOL && t > start {
                start = t;
            }
        }
    }
    let first = (geo, start);
    let mut out = Vec::new();
    let mut cur = first;
    for _ in 0..1000 {
        let (g, s) = cur;
        let mut best: Option<(f64, usize)> = None;
        for (k, &(p, q)) in poly.sides.iter().enumerate() {
            if let Some(t) = g.meet(p, q) {
                if t > s + TOL && best.map_or(true, |(b, _)| t < b) {
                    best = Some((t, k));
                }
            }
        }
        let (t, k) = best?;
        out.push(Chord { geo: g, start: s, end: t, exit: poly.labels[k] });
        let h = poly.gens[k].inverse();
        let ng = g.image(&h);
        let ns = ng.param(h.apply(g.point(t)));
        cur = (ng, ns);
        let (fg, fs) = first;
        if (ng.from - fg.from).norm() < 1e-7 && (ng.to - fg.to).norm() < 1e-7 && (ns - fs).abs() < 1e-6 {
            return Some(out);
        }
    }
    None
}

/// A transverse crossing of two chords: indices, parameters and the sign of
/// the frame (tangent of first chord, tangent of second chord).
#[derive(Clone, Copy, Debug)]
pub struct NumericCrossing {
    pub a: usize,
    pub b: usize,
    pub sign: i8,
    pub margin: f64,
}

pub fn chord_crossings(cs: &[Chord]) -> Vec<NumericCrossing> {
    let mut out = Vec::new();
    for a in 0..cs.len() {
        for b in a + 1..cs.len() {
            let (ca, cb) = (&cs[a], &cs[b]);
            let Some(ta) = ca.geo.meet(cb.geo.from, cb.geo.to) else { continue };
            let z = ca.geo.point(ta);
            let tb = cb.geo.param(z);
            let margin = (ta - ca.start).min(ca.end - ta).min(tb - cb.start).min(cb.end - tb);
            if margin > 0.0 {
                let (da, db) = (ca.geo.tangent(ta), cb.geo.tangent(tb));
                let cross = da.re * db.im - da.im * db.re;
                out.push(NumericCrossing { a, b, sign: if cross > 0.0 { 1 } else { -1 }, margin });
            } else if margin > -TOL {
                out.push(NumericCrossing { a, b, sign: 0, margin });
            }
        }
    }
    out
}

/// Letters crossed going along the curve from chord a to chord b.
pub fn arc_word(cs: &[Chord], a: usize, b: usize) -> Vec<Letter> {
    let n = cs.len();
    let mut out = Vec::new();
    let mut t = a;
    while t != b {
        out.push(cs[t].exit);
        t = (t + 1) % n;
    }
    out
}
