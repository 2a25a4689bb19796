use nonoverlap::bound::symmetric_value;
use nonoverlap::quaddiff::{critical_graph, extremal_product_estimate};
use nonoverlap::specfun::psi;
use nonoverlap::wos::WosParams;

#[test]
fn circular_domains_attain_the_symmetric_value() {
    for (gamma, seed) in [(0.25, 11), (0.5, 12), (0.65, 13)] {
        let field = critical_graph(gamma, 2e-3).unwrap();
        let est = extremal_product_estimate(&field, &WosParams::new(50_000, 1e-4, seed)).unwrap();
        let exact = symmetric_value(gamma).unwrap();
        eprintln!(
            "gamma {gamma}: {} ± {} vs {exact}",
            est.value, est.std_error
        );
        assert!(
            (est.value - exact).abs() <= 3.0 * est.std_error,
            "gamma {gamma}"
        );
        assert!((est.value / exact - 1.0).abs() < 0.02);
        // w -> -w maps the domain of 1 onto the domain of -1
        let (a, b) = (&est.r_one, &est.r_minus_one);
        assert!((a.value - b.value).abs() <= 3.0 * a.std_error.hypot(b.std_error));
    }
}

#[test]
fn quarter_matches_psi_of_half() {
    assert!((symmetric_value(0.25).unwrap() - 16.0 * psi(0.5).unwrap()).abs() < 1e-14);
}
