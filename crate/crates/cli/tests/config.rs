use cyclic_caching::{PhantomSlotPolicy, Scheme};
use cyclic_caching_cli::config::*;
use cyclic_caching_cli::error::CliError;

#[test]
fn key_value_file() {
    let cfg = RunConfig::from_key_values(
        "# small network\nK = 6\nt=2\nL = 3\nalpha = 3 # full multiplexing\nK_f = 0\nscheme = red\nsnr_db = 0,10, 20\nphantom-slot-policy = keep\n",
    )
    .unwrap();
    assert_eq!(cfg.users, Some(6));
    assert_eq!(cfg.scheme, Some(Scheme::Red));
    assert_eq!(cfg.snr_db, Some(vec![0.0, 10.0, 20.0]));
    assert_eq!(cfg.phantom_policy, Some(PhantomSlotPolicy::Keep));
    assert_eq!(cfg.params().unwrap().antennas, 3);
}

#[test]
fn bad_lines_name_the_line() {
    let err = RunConfig::from_key_values("K = 6\nbogus = 1\n").unwrap_err();
    assert!(matches!(err, CliError::Parse { line: 2, .. }));
    let err = RunConfig::from_key_values("K = six\n").unwrap_err();
    assert!(matches!(err, CliError::Parse { line: 1, .. }));
    let err = RunConfig::from_key_values("K 6\n").unwrap_err();
    assert!(matches!(err, CliError::Parse { line: 1, .. }));
}

#[test]
fn overlay_prefers_later_sources() {
    let file = RunConfig {
        users: Some(6),
        seed: Some(1),
        ..RunConfig::default()
    };
    let flags = RunConfig {
        seed: Some(9),
        ..RunConfig::default()
    };
    let merged = file.overlay(flags);
    assert_eq!((merged.users, merged.seed), (Some(6), Some(9)));
}

#[test]
fn snr_lists_and_ranges() {
    assert_eq!(parse_snr_list("0:30:10").unwrap(), [0.0, 10.0, 20.0, 30.0]);
    assert_eq!(parse_snr_list("-5,2.5").unwrap(), [-5.0, 2.5]);
    assert!(parse_snr_list("").unwrap().is_empty());
    assert!(parse_snr_list("0:10:0").is_err());
    assert!(parse_snr_list("x").is_err());
}

#[test]
fn missing_and_invalid_parameters() {
    assert!(RunConfig::default().params().is_err());
    let cfg = RunConfig {
        users: Some(6),
        caching_gain: Some(4),
        antennas: Some(3),
        alpha: Some(3),
        ..RunConfig::default()
    };
    let err = cfg.params().unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("t <= alpha"));
}

#[test]
fn empty_snr_list_is_rejected() {
    let cfg = RunConfig {
        users: Some(6),
        caching_gain: Some(2),
        antennas: Some(3),
        alpha: Some(3),
        snr_db: Some(vec![]),
        ..RunConfig::default()
    };
    assert_eq!(cfg.sim_config().unwrap_err().exit_code(), 2);
}
