use cdgl::cell::*;
use cdgl::fixtures::{fixture, SHIPPED};
use cdgl::graded::complex::DegreeWindow;
use cdgl::Error;

fn report(name: &str) -> CellReport {
    let c = CellAttachment::new(&fixture(name).unwrap()).unwrap();
    classify_attachment(&c, DegreeWindow::new(0, 3).unwrap()).unwrap()
}

#[test]
fn disk_has_contractible_classifying_space() {
    for name in ["disk1", "disk2", "disk3"] {
        let r = report(name);
        assert!(!r.triviality.boundary_in_m, "{name}");
        assert!(r.transport.degrees.iter().all(|h| h.direct == 0 && h.via_psi == 0));
        assert!(r.contractible_in_window && r.group == "trivial");
        assert!(r.automorphisms.lambda_forced_one);
        assert!(r.pass());
    }
}

#[test]
fn cp2_pipeline() {
    let r = report("cp2");
    assert_eq!((r.n, r.cell.as_str()), (3, "x2"));
    assert!(!r.triviality.boundary_in_m && r.triviality.cycles_in_complement);
    let h: Vec<(i64, usize, usize)> = r.transport.degrees.iter().map(|h| (h.k, h.direct, h.via_psi)).collect();
    assert_eq!(h, vec![(0, 0, 0), (1, 1, 1), (2, 0, 0), (3, 0, 0)]);
    assert!(r.transport.certificate.bijective && r.transport.certificate.chain_map);
    assert_eq!(r.h0.dim, 0);
    assert_eq!(r.h_n_full, 0);
    assert!(r.automorphisms.lambda_forced_one && r.automorphisms.members_verified);
    assert_eq!(r.lambda_oracle.status, Consistency::Consistent);
    // the proof's count, dim H_0 = dim H_3(L) − 1 = −1, cannot hold
    let proof = r.flags.iter().find(|f| f.reading == "proof, H_n of L").unwrap();
    assert_eq!((proof.predicted, proof.computed, proof.status), (-1, 0, Consistency::Inconsistent));
    let remark = r.flags.iter().find(|f| f.reading == "remark, H_n of L").unwrap();
    assert_eq!(remark.status, Consistency::Consistent);
    assert_eq!(r.classifying_homotopy[1], (2, 1));
    assert!(r.pass());
}

#[test]
fn trivial_attachment_frees_lambda() {
    for name in ["wedge", "sphere2", "sphere3"] {
        let r = report(name);
        assert!(r.triviality.boundary_in_m && r.triviality.x_is_cycle, "{name}");
        let a = &r.automorphisms;
        assert!(!a.lambda_forced_one && a.members_verified && a.parameters_injective, "{name}");
        assert!(a.members.iter().any(|m| m.lambda == "-1") && a.members.iter().any(|m| m.lambda == "1/3"));
        assert!(!r.contractible_in_window);
        assert!(r.group.contains("ℚ*"));
    }
    // wedge: α ranges over ker d ∩ L''_2 = ℚ[u,u]
    let r = report("wedge");
    assert_eq!(r.automorphisms.alpha_dim, 1);
    assert_eq!(r.automorphisms.alpha_basis, vec!["[u, u]".to_string()]);
    assert_eq!(r.h0.dim, 1);
    assert_eq!(r.h_n_full, 2);
}

#[test]
fn every_fixture_agrees_two_ways() {
    for name in SHIPPED {
        let r = report(name);
        assert!(r.transport.agree && r.transport.degree_zero_matches, "{name}");
        assert_eq!(r.triviality.equivalence.status, Consistency::Consistent, "{name}");
        assert_eq!(r.lambda_oracle.status, Consistency::Consistent, "{name}");
        assert!(r.flags.len() >= 4, "{name}: comparison flags missing");
        assert!(r.pass(), "{name}");
    }
}

#[test]
fn two_cells_are_rejected() {
    let l = fixture("cp3").unwrap();
    let inc = l.sub_algebra(&[0]).unwrap();
    assert!(matches!(CellAttachment::from_inclusion(&inc), Err(Error::Shape(_))));
}

#[test]
fn psi_certificates() {
    for name in ["disk1", "cp2"] {
        let c = CellAttachment::new(&fixture(name).unwrap()).unwrap();
        let cert = psi_transport(&c, DegreeWindow::new(-2, 5).unwrap());
        assert!(cert.bijective && cert.chain_map, "{name}");
    }
}

#[test]
fn gamma_flag_from_linear_parts() {
    let g = gamma_flag(&CellAttachment::new(&fixture("cp2").unwrap()).unwrap());
    assert_eq!((g.total, g.gamma), (2, 1));
    assert_eq!(g.spanning, vec!["x1".to_string()]);
    let g = gamma_flag(&CellAttachment::new(&fixture("disk1").unwrap()).unwrap());
    assert_eq!((g.total, g.gamma, g.linear_omega.as_str()), (0, 0, "x"));
}

#[test]
fn narrow_window_is_reported() {
    let c = CellAttachment::new(&fixture("cp2").unwrap()).unwrap();
    let r = classify_attachment(&c, DegreeWindow::new(0, 12).unwrap());
    assert!(matches!(r, Err(Error::WindowTooNarrow { .. })));
}
