use cyclic_caching::build_scheme;
use cyclic_caching::{Scheme, SchemeParams};
use cyclic_caching_cli::error::CliError;
use cyclic_caching_cli::planfile::*;

#[test]
fn round_trip_small_plan() {
    let params = SchemeParams::new(6, 2, 3, 3);
    let plan = build_scheme(&params, Scheme::Lin).unwrap();
    let text = write_plan(&plan, Scheme::Lin);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("#plan v1 scheme=LIN K=6 t=2 L=3 alpha=3 K_f=0 phi=1")
    );
    assert_eq!(lines.nth(1), Some("V 110000"));
    assert!(text.contains("\n1 1 1 1 3 1 2,5 -\n"));
    let parsed = parse_plan(&text).unwrap();
    assert_eq!(parsed.plan.transmissions, plan.transmissions);
    assert_eq!(parsed.plan.subpackets, 5);
    assert_eq!(parsed.stream_lines[&(0, 1)], 9);
}

#[test]
fn round_trip_grouped_plan_with_phantoms() {
    let params = SchemeParams::new(30, 4, 4, 4).with_phantoms(2);
    let plan = build_scheme(&params, Scheme::Red).unwrap();
    let parsed = parse_plan(&write_plan(&plan, Scheme::Red)).unwrap();
    assert_eq!(parsed.plan.transmissions, plan.transmissions);
    assert_eq!(parsed.plan.layout, plan.layout);
    assert_eq!(parsed.plan.real_users, 30);
    assert_eq!(parsed.scheme, Scheme::Red);
}

#[test]
fn structural_errors_name_lines() {
    let plan = build_scheme(&SchemeParams::new(6, 2, 3, 3), Scheme::Lin).unwrap();
    let text = write_plan(&plan, Scheme::Lin);

    let truncated: String = text.lines().take(40).map(|l| format!("{l}\n")).collect();
    assert!(matches!(
        parse_plan(&truncated),
        Err(CliError::Parse { line: 40, .. })
    ));

    let cut = &text[..text.find("1 1 2 2").unwrap() + 4];
    assert!(matches!(
        parse_plan(cut),
        Err(CliError::Parse { line: 10, .. })
    ));

    let bad = text.replacen("1 1 1 1 3 1 2,5 -", "1 1 1 x 3 1 2,5 -", 1);
    assert!(matches!(
        parse_plan(&bad),
        Err(CliError::Parse { line: 9, .. })
    ));

    let bad = text.replacen("t=2", "t=5", 1);
    assert!(matches!(
        parse_plan(&bad),
        Err(CliError::Parse { line: 1, .. })
    ));

    assert!(matches!(
        parse_plan(""),
        Err(CliError::Parse { line: 1, .. })
    ));
}
