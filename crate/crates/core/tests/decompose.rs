use flatdisc_core::decompose::*;
use flatdisc_core::distributions::Codistribution;
use flatdisc_core::expr::{parse_free, Expr};
use flatdisc_core::exterior::DifferentialForm;
use flatdisc_core::system::{eliminate_trivial_inputs, DiscreteSystem};

fn e(s: &str) -> Expr {
    parse_free(s).unwrap()
}

fn running() -> DiscreteSystem {
    DiscreteSystem::parse(
        &["x1", "x2", "x3", "x4", "x5"],
        &["u1", "u2"],
        &["x2*(u1+1)", "u1", "x4+u2-1", "x5+1-x1*(u1+1)/(x2+1)", "u2+x2"],
    )
    .unwrap()
}

#[test]
fn p0_of_running_example() {
    let s = running();
    let p0 = build_p0(&s);
    assert_eq!(p0.dim(), 5);
    assert_eq!(p0.generators()[0], DifferentialForm::differential(s.total(), &e("x2*(u1+1)")));
}

#[test]
fn first_iteration() {
    let s = running();
    let step = normal_form_step(&s).unwrap();
    assert_eq!((step.m_w, step.m_v), (1, 1));
    assert_eq!(step.p1.dim(), 4);
    // g spans the same codistribution as the listed functions
    let expected_g = ["(-x1*(u1+1)+x5*(x2+1))/(x2+1)", "x2*(u1+1)", "x2-x4", "u1"].map(e);
    assert!(Codistribution::exact(s.total(), &step.g).span_eq(&Codistribution::exact(s.total(), &expected_g)));
    assert_eq!(step.q, vec![e("u1"), e("u2+x2")]);
    // h equals the displayed transformation up to exchanging x̃1 and x̃2
    assert_eq!(step.h, ["xt1", "xt4", "xt5 - xt3 - 1", "xt2 + 1", "xt5"].map(e));
    assert_eq!(step.transformed[3], e("v1"));
    assert_eq!(step.transformed[4], e("w1"));

    let sp = split(&step).unwrap();
    let r = sp.remaining.unwrap();
    assert_eq!(r.n(), 4);
    assert_eq!(r.m(), 2);
    // u1 is the shifted-out state, u2 the new v
    assert_eq!(sp.renaming.inputs[0].1.as_str(), "xt5");
    assert_eq!(sp.renaming.inputs[1].1.as_str(), "v1");
    assert_eq!(r.dynamics()[3], e("u2"));
}

#[test]
fn second_iteration_and_terminal_system() {
    let s = running();
    let r1 = split(&normal_form_step(&s).unwrap()).unwrap().remaining.unwrap();
    let (r1, rec) = eliminate_trivial_inputs(&r1).unwrap();
    assert!(rec.is_identity());
    let step = normal_form_step(&r1).unwrap();
    assert_eq!((step.m_w, step.m_v), (2, 0));
    let p2 = Codistribution::exact(r1.total(), &[e("x2"), e("x4")]);
    assert!(step.p1.span_eq(&p2));
    let sp = split(&step).unwrap();
    let term = sp.remaining.unwrap();
    assert_eq!(term.n(), 2);
    // static terminal map, invertible in the inputs
    assert_eq!(term.dynamics(), &[e("u2-u1"), e("u2")]);
    for d in term.dynamics() {
        assert!(d.free_vars().iter().all(|v| term.inputs().contains(v)));
    }
    assert_eq!(term.input_jacobian().generic_rank(), 2);
}

#[test]
fn pure_shift_is_fully_reduced() {
    let s = DiscreteSystem::parse(&["x1"], &["u"], &["u"]).unwrap();
    let step = normal_form_step(&s).unwrap();
    assert_eq!(step.m_w, 1);
    assert_eq!(step.p1.dim(), 0);
    assert!(split(&step).unwrap().remaining.is_none());
}

#[test]
fn round_trip_of_transformation() {
    let s = running();
    let step = normal_form_step(&s).unwrap();
    // h ∘ h⁻¹ = id on x
    let xs = s.states().vars();
    let bind = xs.iter().cloned().zip(step.h.iter().cloned()).collect();
    for (i, hi) in step.h_inv.iter().enumerate() {
        assert_eq!(hi.substitute(&bind), Expr::var(step.xt_names[i].clone()));
    }
    // g̃ depends on x̃ and v only
    for t in &step.transformed[..4] {
        assert!(!t.depends_on(&step.w_names[0]));
    }
}
