use std::path::PathBuf;

use chemotaxis::RunConfig;

fn shipped(name: &str) -> RunConfig {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name]
        .iter()
        .collect();
    RunConfig::from_file(&path).unwrap()
}

#[test]
fn shipped_presets_match_library_presets() {
    let mut c1 = shipped("case1.toml");
    assert_eq!(c1.lx, Some(std::f64::consts::TAU));
    c1.lx = None;
    c1.ly = None;
    c1.fit_window = None;
    assert_eq!(c1, RunConfig::case1());
    assert_eq!(shipped("case2.toml"), RunConfig::case2());
}

#[test]
fn spacing_config_resolves_to_six_unit_domain() {
    let g = shipped("spacing.toml").grid().unwrap();
    assert_eq!((g.lx(), g.ly(), g.dx()), (6.0, 6.0, 0.5));
}
