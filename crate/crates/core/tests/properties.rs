use num_bigint::BigInt;
use proptest::prelude::*;

use localgauss::building::{canonicalize, degree, is_adjacent, neighbors, LatticeClass};
use localgauss::field::{AbsValue, FieldConfig, Scalar, ValInt};
use localgauss::gen::InstanceGen;
use localgauss::lattice::{hnf, Lattice};
use localgauss::matrix::MatrixK;
use localgauss::matroid::ci_matroid;
use localgauss::orthogonal::{is_orthonormal, orthonormalize, svd};
use localgauss::tropical::{fit_tropical, phi_exact, trop2d};
use localgauss::{mle, Execution, GaussianDist, LogLikelihood};

const PRIMES: [u64; 3] = [2, 3, 5];

fn field(k: usize) -> FieldConfig {
    FieldConfig::new(PRIMES[k % 3]).unwrap()
}

fn small_scalar() -> impl Strategy<Value = Scalar> {
    (-200i64..200, 1i64..60).prop_map(|(a, b)| Scalar::new(a, b).unwrap())
}

/// `P(V ≥ v)` by exhaustive enumeration of `z ∈ (Z/p^m)^d`: once
/// `A·p^m O^d ⊂ p^n O^d` with `n ≥ max(v)`, the event depends on `z mod p^m`
/// only. Returns the numerator over `p^{m·d}`.
fn brute_tail(lattice: &Lattice, v: &[i64]) -> (u64, u64) {
    let f = lattice.field();
    let p = f.p();
    let a = lattice.matrix();
    let d = lattice.dim();
    let minval = a.min_val(f).finite().unwrap();
    let n = *v.iter().max().unwrap();
    let m = (n - minval).max(0) as u32;
    let modulus = p.pow(m);
    let total = modulus.pow(d as u32);
    let mut hits = 0;
    for code in 0..total {
        let mut c = code;
        let z: Vec<Scalar> = (0..d)
            .map(|_| {
                let x = c % modulus;
                c /= modulus;
                Scalar::from(x)
            })
            .collect();
        let x = a.mul_vec(&z).unwrap();
        if x.iter()
            .zip(v)
            .all(|(xi, &vi)| f.val(xi) >= ValInt::Finite(vi))
        {
            hits += 1;
        }
    }
    (hits, total)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ultrametric_and_multiplicative(k in 0usize..3, x in small_scalar(), y in small_scalar()) {
        let f = field(k);
        prop_assert!(f.val(&(&x + &y)) >= f.val(&x).min(f.val(&y)));
        prop_assert_eq!(f.val(&(&x * &y)), f.val(&x) + f.val(&y));
        if f.val(&x) != f.val(&y) {
            prop_assert_eq!(f.val(&(&x + &y)), f.val(&x).min(f.val(&y)));
        }
        if let (AbsValue::Power(a), AbsValue::Power(b)) = (f.abs(&x), f.abs(&y)) {
            prop_assert_eq!(f.abs(&(&x * &y)), AbsValue::Power(a + b));
        }
    }

    #[test]
    fn digits_are_sound(k in 0usize..3, x in small_scalar(), count in 1usize..12) {
        let f = field(k);
        prop_assume!(!x.is_zero());
        let e = f.digits(&x, count).unwrap();
        prop_assert!(e.digits.iter().all(|&u| u < f.p()));
        prop_assert!(e.digits[0] != 0);
        let err = &x - &e.partial_sum(&f);
        prop_assert!(f.val(&err) >= ValInt::Finite(e.start + count as i64));
    }

    #[test]
    fn hnf_invariant_under_gl_ok(k in 0usize..3, seed in any::<u64>(), d in 1usize..5) {
        let f = field(k);
        let mut g = InstanceGen::new(&f, seed);
        let a = g.matrix(d, d + 1, 3);
        let u = g.gl_ok(d + 1);
        let l = hnf(&f, &a);
        prop_assert_eq!(&hnf(&f, &a.mul(&u).unwrap()), &l);
        prop_assert!(l.is_canonical());
        prop_assert_eq!(&hnf(&f, l.matrix()), &l);
    }

    #[test]
    fn dual_and_measure(k in 0usize..3, seed in any::<u64>(), d in 1usize..5) {
        let f = field(k);
        let mut g = InstanceGen::new(&f, seed);
        let l = g.lattice(d, 3);
        let m = g.lattice(d, 3);
        prop_assert_eq!(&l.dual().unwrap().dual().unwrap(), &l);
        prop_assert_eq!(l.dual().unwrap().measure_log().unwrap(), -l.measure_log().unwrap());
        let s = l.sum(&m).unwrap();
        let i = l.intersect(&m).unwrap();
        prop_assert!(l.is_sublattice_of(&s).unwrap() && i.is_sublattice_of(&l).unwrap());
        prop_assert!(s.measure_log().unwrap() <= l.measure_log().unwrap());
        prop_assert!(i.measure_log().unwrap() >= l.measure_log().unwrap());
        // λ(L + M)·λ(L ∩ M) = λ(L)·λ(M)
        prop_assert_eq!(
            s.measure_log().unwrap() + i.measure_log().unwrap(),
            l.measure_log().unwrap() + m.measure_log().unwrap()
        );
    }

    #[test]
    fn svd_is_consistent(k in 0usize..3, seed in any::<u64>(), d in 1usize..4) {
        let f = field(k);
        let mut g = InstanceGen::new(&f, seed);
        let a = g.lattice(d, 3).matrix().mul(&g.gl_ok(d)).unwrap();
        let s = svd(&f, &a);
        prop_assert!(s.u.is_integral(&f) && s.u.inverse().unwrap().is_integral(&f));
        prop_assert!(s.v.is_integral(&f) && s.v.inverse().unwrap().is_integral(&f));
        prop_assert_eq!(&s.u.mul(&s.d).unwrap().mul(&s.v).unwrap(), &a);
        let exps: Vec<i64> = s.exponents(&f).into_iter().map(|e| e.finite().unwrap()).collect();
        prop_assert!(exps.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(exps.iter().sum::<i64>(), f.val(&a.det().unwrap()).finite().unwrap());
    }

    #[test]
    fn gl_ok_rows_are_orthonormal(k in 0usize..3, seed in any::<u64>(), d in 1usize..5) {
        let f = field(k);
        let u = InstanceGen::new(&f, seed).gl_ok(d);
        prop_assert!(is_orthonormal(&f, &u.row_vecs()).unwrap());
        let rows = InstanceGen::new(&f, seed ^ 1).lattice(d, 2).matrix().row_vecs();
        let o = orthonormalize(&f, &rows).unwrap();
        prop_assert!(is_orthonormal(&f, &o).unwrap());
    }

    #[test]
    fn mle_is_optimal(k in 0usize..3, seed in any::<u64>(), d in 1usize..4) {
        let f = field(k);
        let mut g = InstanceGen::new(&f, seed);
        let data = g.dataset(d + 2, d, 3);
        let Ok(l) = mle(&f, &data) else { return Ok(()); };
        prop_assume!(l.is_full_rank());
        for x in &data {
            prop_assert!(l.contains(x).unwrap());
        }
        let best = GaussianDist::new(l.clone()).log_likelihood(&data).unwrap();
        for _ in 0..5 {
            let other = l.sum(&g.lattice(d, 2)).unwrap();
            let ll = GaussianDist::new(other.clone()).log_likelihood(&data).unwrap();
            if other == l {
                prop_assert_eq!(ll, best);
            } else {
                prop_assert!(ll < best);
            }
            let random = GaussianDist::new(g.lattice(d, 2)).log_likelihood(&data).unwrap();
            prop_assert!(random == LogLikelihood::NegInfinity || random <= best);
        }
        // Data scaled by a unit gives the same estimate.
        let u = g.unit();
        let scaled: Vec<Vec<Scalar>> = data.iter().map(|x| x.iter().map(|c| c * &u).collect()).collect();
        prop_assert_eq!(mle(&f, &scaled).unwrap(), l);
    }

    #[test]
    fn mle_recovers_from_samples(k in 0usize..3, seed in any::<u64>(), d in 1usize..4) {
        let f = field(k);
        let l = InstanceGen::new(&f, seed).lattice(d, 2);
        let dist = GaussianDist::new(l.clone());
        let data: Vec<Vec<Scalar>> = dist
            .sample_many(24 * d, 12, seed, Execution::Sequential)
            .unwrap()
            .into_iter()
            .map(|s| s.point)
            .collect();
        // The samples span L unless all of them fall in a maximal
        // sublattice, which has probability below 2^{-20} here.
        prop_assert_eq!(mle(&f, &data).unwrap(), l);
    }

    #[test]
    fn matroid_exchange_and_scaling(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3]), cond_mask in 0usize..8) {
        let f = FieldConfig::new(p).unwrap();
        let mut g = InstanceGen::new(&f, seed);
        let l = g.lattice(4, 2);
        let cond: Vec<usize> = (0..3).filter(|i| cond_mask >> i & 1 == 1).collect();
        let m = ci_matroid(&GaussianDist::new(l.clone()), &cond).unwrap();
        let bases = m.bases().unwrap();
        prop_assert!(!bases.is_empty());
        for b1 in &bases {
            for b2 in &bases {
                for x in b1.iter().filter(|x| !b2.contains(x)) {
                    let ok = b2.iter().filter(|y| !b1.contains(y)).any(|y| {
                        let mut c: Vec<usize> = b1.iter().filter(|z| *z != x).copied().collect();
                        c.push(*y);
                        c.sort_unstable();
                        bases.contains(&c)
                    });
                    prop_assert!(ok, "exchange fails for {:?} {:?}", b1, b2);
                }
            }
        }
        // The matroid depends on the lattice only, and is unchanged by
        // scaling or by a diagonal change of units.
        let rebased = hnf(&f, &l.matrix().mul(&g.gl_ok(4)).unwrap());
        let scaled = l.scale(&f.pow(g.int(-3, 3)));
        let units: Vec<Scalar> = (0..4).map(|_| g.unit()).collect();
        let rescaled = l.transform(&MatrixK::diagonal(&units)).unwrap();
        for other in [rebased, scaled, rescaled] {
            let m2 = ci_matroid(&GaussianDist::new(other), &cond).unwrap();
            prop_assert_eq!(m2.bases().unwrap(), bases.clone());
        }
    }

    #[test]
    fn theorem3_against_trop2d(k in 0usize..3, seed in any::<u64>(), v1 in -8i64..9, v2 in -8i64..9) {
        let f = field(k);
        let l = InstanceGen::new(&f, seed).lattice(2, 4);
        let poly = trop2d(&l).unwrap();
        prop_assert!(poly.is_supermodular());
        prop_assert_eq!(phi_exact(&l, &[v1, v2]).unwrap(), poly.eval(&[v1, v2]).unwrap());
        prop_assert_eq!(&fit_tropical(&l).unwrap(), &poly);
    }

    #[test]
    fn phi_is_monotone(k in 0usize..3, seed in any::<u64>(), d in 1usize..4, i in 0usize..3) {
        let f = field(k);
        let mut g = InstanceGen::new(&f, seed);
        let l = g.lattice(d, 3);
        let v: Vec<i64> = (0..d).map(|_| g.int(-4, 4)).collect();
        let mut w = v.clone();
        w[i % d] += 1;
        let a = phi_exact(&l, &v).unwrap();
        let b = phi_exact(&l, &w).unwrap();
        prop_assert!(a >= 0 && b >= a);
    }

    #[test]
    fn adjacency_is_symmetric(k in 0usize..3, seed in any::<u64>(), d in 2usize..4) {
        let f = field(k);
        let mut g = InstanceGen::new(&f, seed);
        let a = canonicalize(&g.lattice(d, 2)).unwrap();
        let b = canonicalize(&g.lattice(d, 2)).unwrap();
        prop_assert_eq!(is_adjacent(&a, &b).unwrap(), is_adjacent(&b, &a).unwrap());
        let n = neighbors(&a).unwrap();
        let pick = &n[g.int(0, n.len() as i64 - 1) as usize];
        prop_assert!(is_adjacent(&a, pick).unwrap() && is_adjacent(pick, &a).unwrap());
        prop_assert!(!is_adjacent(&a, &a).unwrap());
    }

    #[test]
    fn neighbors_translate(k in 0usize..2, seed in any::<u64>(), d in 2usize..4) {
        let f = field(k);
        let l = InstanceGen::new(&f, seed).lattice(d, 2);
        let c = canonicalize(&l).unwrap();
        let mut moved: Vec<String> = neighbors(&LatticeClass::standard(&f, d))
            .unwrap()
            .iter()
            .map(|n| canonicalize(&hnf(&f, &l.matrix().mul(n.rep().matrix()).unwrap())).unwrap().key())
            .collect();
        moved.sort();
        let direct: Vec<String> = neighbors(&c).unwrap().iter().map(LatticeClass::key).collect();
        prop_assert_eq!(moved, direct);
    }
}

#[test]
fn phi_matches_counting_oracle() {
    for (k, seed) in (0..3).flat_map(|k| (0..12u64).map(move |s| (k, s))) {
        let f = field(k);
        let p = f.p();
        let mut g = InstanceGen::new(&f, seed);
        let d = if p == 2 { 2 + (seed % 2) as usize } else { 2 };
        let l = g.lattice(d, 1);
        for _ in 0..4 {
            let v: Vec<i64> = (0..d).map(|_| g.int(-1, 2)).collect();
            let (hits, total) = brute_tail(&l, &v);
            let phi = phi_exact(&l, &v).unwrap();
            // hits / total = p^{-φ}
            assert_eq!(
                BigInt::from(hits) * BigInt::from(p).pow(phi as u32),
                BigInt::from(total),
                "lattice {l}, v = {v:?}"
            );
        }
    }
}

#[test]
fn neighbor_counts_match_degree() {
    for d in 2..=4 {
        for p in PRIMES {
            let f = FieldConfig::new(p).unwrap();
            let n = neighbors(&LatticeClass::standard(&f, d)).unwrap();
            assert_eq!(n.len() as u128, degree(d, p), "d = {d}, p = {p}");
        }
    }
}
