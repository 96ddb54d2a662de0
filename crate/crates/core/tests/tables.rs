use jdlattice::tables::{evaluate_case, price_hs, table_cases, EvalOptions};

fn opts(with_hs: bool) -> EvalOptions {
    EvalOptions { c: 1.0, epsilon: None, with_hs }
}

#[test]
fn table_shapes() {
    let sizes: Vec<usize> = (1..=4).map(|t| table_cases(t, None).unwrap().len()).collect();
    assert_eq!(sizes, vec![27, 18, 9, 9]);
    assert_eq!(table_cases(2, Some('c')).unwrap().len(), 3);
    assert!(table_cases(5, None).is_err());
    assert!(table_cases(1, Some('Z')).is_err());
}

#[test]
fn full_lattice_column_table_1_panel_b() {
    for case in table_cases(1, Some('B')).unwrap().into_iter().filter(|c| c.n == 200) {
        let hs = price_hs(&case, 1.0).unwrap().value;
        let reference = case.reference("hs").unwrap();
        assert!((hs - reference).abs() <= 1e-4, "K={} {hs} vs {reference}", case.row);
    }
}

#[test]
fn table_3_rows() {
    for case in table_cases(3, None).unwrap() {
        let r = evaluate_case(&case, &opts(false)).unwrap();
        let hscut = case.reference("hscut").unwrap();
        let merton = case.reference("merton").unwrap();
        assert!((r.hscut.value - hscut).abs() <= 2e-3, "{} {} hscut {}", case.panel, case.row, r.hscut.value);
        assert!((r.merton.unwrap() - merton).abs() <= 5e-5, "{} {} merton {:?}", case.panel, case.row, r.merton);
    }
}

#[test]
fn truncated_rows_carry_bounds() {
    let case = &table_cases(1, Some('A')).unwrap()[0];
    let r = evaluate_case(case, &opts(true)).unwrap();
    let b = r.hscut.bounds.unwrap();
    assert!(b.kbar >= 1 && b.lbar >= 1);
    assert!(r.hs.unwrap().nodes_visited > r.hscut.nodes_visited);
}
