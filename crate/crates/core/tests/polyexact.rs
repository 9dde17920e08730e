use num_bigint::BigUint;
use proptest::prelude::*;
use stackshift::indexcalc::StepBudget;
use stackshift::polyexact::*;

fn small_rat() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn pos_rat() -> impl Strategy<Value = Rational> {
    (1i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

/// Boxes and triangles with rational placement and height.
fn kernel() -> impl Strategy<Value = PiecewisePoly> {
    prop_oneof![
        (small_rat(), pos_rat(), pos_rat()).prop_map(|(lo, len, h)| {
            PiecewisePoly::constant_on(lo.clone(), lo + len, h).unwrap()
        }),
        (small_rat(), pos_rat(), pos_rat()).prop_map(|(c, t, h)| {
            fejer_t(&t).unwrap().translate(&-c).scale(&h)
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mass_is_conserved(f in kernel(), h in kernel()) {
        prop_assert_eq!(f.convolve(&h).integral(), f.integral() * h.integral());
    }

    #[test]
    fn convolution_commutes(f in kernel(), h in kernel()) {
        prop_assert_eq!(f.convolve(&h), h.convolve(&f));
    }

    #[test]
    fn convolution_associates(f in kernel(), g in kernel(), h in kernel()) {
        prop_assert_eq!(f.convolve(&g).convolve(&h), f.convolve(&g.convolve(&h)));
    }

    #[test]
    fn supports_add(f in kernel(), h in kernel()) {
        let fh = f.convolve(&h);
        let (a, b) = f.support().unwrap();
        let (c, d) = h.support().unwrap();
        let (lo, hi) = fh.support().unwrap();
        prop_assert_eq!(lo.clone(), a + c);
        prop_assert_eq!(hi.clone(), b + d);
    }

    #[test]
    fn shift_sums_of_nonnegative_kernels_certify(
        f in kernel(),
        shifts in prop::collection::vec((small_rat(), 1u32..5), 1..5),
    ) {
        let shifts: Vec<(Rational, BigUint)> =
            shifts.into_iter().map(|(r, c)| (r, BigUint::from(c))).collect();
        let s = f.shift_sum(&shifts);
        prop_assert!(nonneg_certificate(&s).holds());
        let total: BigUint = shifts.iter().map(|(_, c)| c.clone()).sum();
        prop_assert_eq!(s.integral(), f.integral() * Rational::from_integer(total.into()));
    }

    #[test]
    fn shift_sum_commutes_with_convolution(
        f in kernel(),
        h in kernel(),
        shifts in prop::collection::vec((small_rat(), 1u32..4), 1..4),
    ) {
        let shifts: Vec<(Rational, BigUint)> =
            shifts.into_iter().map(|(r, c)| (r, BigUint::from(c))).collect();
        prop_assert_eq!(f.convolve(&h).shift_sum(&shifts), f.convolve(&h.shift_sum(&shifts)));
    }

    #[test]
    fn nested_shift_sums_add_offsets(
        f in kernel(),
        i in prop::collection::vec((small_rat(), 1u32..3), 1..3),
        j in prop::collection::vec((small_rat(), 1u32..3), 1..3),
    ) {
        let i: Vec<(Rational, BigUint)> = i.into_iter().map(|(r, c)| (r, BigUint::from(c))).collect();
        let j: Vec<(Rational, BigUint)> = j.into_iter().map(|(r, c)| (r, BigUint::from(c))).collect();
        let mut sum = Vec::new();
        for (a, ca) in &i {
            for (b, cb) in &j {
                sum.push((a + b, ca * cb));
            }
        }
        prop_assert_eq!(f.shift_sum(&i).shift_sum(&j), f.shift_sum(&sum));
    }

    #[test]
    fn dyadic_rescaling_of_shift_sums(
        f in kernel(),
        b in pos_rat(),
        shifts in prop::collection::vec((small_rat(), 1u32..3), 1..4),
    ) {
        // Σ[f:I](bx) = Σ[T_{1/b} f : I/b](x)
        let shifts: Vec<(Rational, BigUint)> =
            shifts.into_iter().map(|(r, c)| (r, BigUint::from(c))).collect();
        let inv = Rational::from_integer(1.into()) / &b;
        let lhs = f.shift_sum(&shifts).dilate(&inv).unwrap();
        let scaled: Vec<(Rational, BigUint)> =
            shifts.iter().map(|(r, c)| (r / &b, c.clone())).collect();
        let rhs = f.dilate(&inv).unwrap().shift_sum(&scaled);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn certificate_agrees_with_dense_sampling(
        f in kernel(),
        h in kernel(),
        c in pos_rat(),
    ) {
        let d = f.sub(&h.scale(&c));
        let cert = nonneg_certificate(&d);
        if let Some((lo, hi)) = d.support() {
            let (lo, hi) = (lo.clone(), hi.clone());
            let n = 97;
            let step = (&hi - &lo) / Rational::from_integer(n.into());
            let sampled_negative = (0..=n)
                .any(|i| d.eval(&(&lo + &step * Rational::from_integer(i.into()))) < rat(0, 1));
            if sampled_negative {
                prop_assert!(!cert.holds());
            }
        }
        if let Some(w) = cert.witness() {
            prop_assert!(d.eval(w) < rat(0, 1));
        }
    }

    #[test]
    fn json_round_trip(f in kernel(), h in kernel()) {
        let p = f.convolve(&h);
        prop_assert_eq!(PiecewisePoly::from_json_str(&p.to_json_string()).unwrap(), p);
    }
}

#[test]
fn dilation_rescales_convolution() {
    // T_a(h*f) = (1/a)(T_a h * T_a f)
    let g = unit_box();
    let k = fejer();
    for a in [rat(1, 2), rat(1, 4), rat(3, 1)] {
        let lhs = g.convolve(&k).dilate(&a).unwrap();
        let rhs = g
            .dilate(&a)
            .unwrap()
            .convolve(&k.dilate(&a).unwrap())
            .scale(&(rat(1, 1) / &a));
        assert_eq!(lhs, rhs, "a = {a}");
        let lhs = g.convolve(&g).dilate(&a).unwrap();
        let gd = g.dilate(&a).unwrap();
        assert_eq!(lhs, gd.convolve(&gd).scale(&(rat(1, 1) / &a)));
    }
}

#[test]
fn box_powers_are_bsplines() {
    let g = unit_box();
    // g*g is the unit triangle
    assert_eq!(g.convolve(&g), fejer());
    // the cubic B-spline at 0 is 2/3
    let b4 = g.conv_power(4).unwrap();
    assert_eq!(b4.eval(&rat(0, 1)), rat(2, 3));
    assert_eq!(b4.eval(&rat(1, 1)), rat(1, 6));
    assert_eq!(b4.integral(), rat(1, 1));
    assert!(g.conv_power(0).is_err());
}

#[test]
fn dyadic_box_convolutions() {
    for j in 1..=6 {
        let o = check_kappaj(j).unwrap();
        assert!(o.holds, "J = {j}");
    }
    assert!(verify_conv01().holds);
}

#[test]
fn elementary_density_bounds() {
    let a = [rat(1, 2), rat(1, 1), rat(3, 2)];
    let f = elementary_density(&a).unwrap();
    let (lo, hi) = f.support().unwrap();
    assert_eq!((lo.clone(), hi.clone()), (rat(-3, 1), rat(3, 1)));
    assert!(check_convelem(&a).unwrap().holds);
    assert!(gj_bound_inductive(&a).unwrap() <= gj_bound(&a).unwrap());
    assert!(gj_bound(&[rat(2, 1), rat(1, 1)]).is_err());
    assert!(gj_bound(&[rat(0, 1)]).is_err());
}

#[test]
fn fejer_kernel_cover() {
    for (h, t) in [(rat(0, 1), rat(1, 1)), (rat(7, 3), rat(1, 5)), (rat(-2, 1), rat(4, 1))] {
        assert!(check_kt(&h, &t).unwrap().holds);
    }
}

#[test]
fn p5_exact_right_sides() {
    let want = [rat(1, 1), rat(3, 2), rat(219, 64)];
    for (m, w) in want.iter().enumerate() {
        let o = verify_p5(m as u64, P5Mode::Exact, StepBudget::default()).unwrap();
        assert!(o.holds);
        assert_eq!(o.rhs, num_traits::ToPrimitive::to_f64(w).unwrap());
    }
    let o = verify_p5(3, P5Mode::Exact, StepBudget::default()).unwrap();
    assert!(o.holds);
    assert!(verify_p5(4, P5Mode::Exact, StepBudget::default()).is_err());
}
