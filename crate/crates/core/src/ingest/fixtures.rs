//! Bundled case-report datasets. Volume tables are synthetic placeholders.

use std::path::{Path, PathBuf};

use super::{
    parse_case_reports_str, parse_origin_config_str, parse_volumes_str, CaseReport, OriginConfig,
    VolumeTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureOrigin {
    Wuhan,
    Iran,
    Italy,
    Egypt,
    UnitedStates,
}

impl FixtureOrigin {
    pub const ALL: [FixtureOrigin; 5] = [
        FixtureOrigin::Wuhan,
        FixtureOrigin::Iran,
        FixtureOrigin::Italy,
        FixtureOrigin::Egypt,
        FixtureOrigin::UnitedStates,
    ];

    pub fn stem(self) -> &'static str {
        match self {
            FixtureOrigin::Wuhan => "wuhan",
            FixtureOrigin::Iran => "iran",
            FixtureOrigin::Italy => "italy",
            FixtureOrigin::Egypt => "egypt",
            FixtureOrigin::UnitedStates => "us",
        }
    }

    fn sources(self) -> (&'static str, &'static str, &'static str) {
        macro_rules! fx {
            ($s:literal) => {
                (
                    include_str!(concat!("../../fixtures/", $s, "_cases.csv")),
                    include_str!(concat!("../../fixtures/", $s, "_volumes.csv")),
                    include_str!(concat!("../../fixtures/", $s, "_origin.json")),
                )
            };
        }
        match self {
            FixtureOrigin::Wuhan => fx!("wuhan"),
            FixtureOrigin::Iran => fx!("iran"),
            FixtureOrigin::Italy => fx!("italy"),
            FixtureOrigin::Egypt => fx!("egypt"),
            FixtureOrigin::UnitedStates => fx!("us"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub cases: Vec<CaseReport>,
    pub volumes: VolumeTable,
    pub origin: OriginConfig,
}

impl Fixture {
    pub fn included(&self) -> Vec<CaseReport> {
        self.cases.iter().filter(|c| c.include).cloned().collect()
    }
}

/// Parses one bundled dataset. Panics only if the bundled files are corrupt.
pub fn load(which: FixtureOrigin) -> Fixture {
    let (cases, volumes, origin) = which.sources();
    let stem = which.stem();
    let p = |kind: &str| PathBuf::from(format!("fixtures/{stem}_{kind}"));
    Fixture {
        cases: parse_case_reports_str(cases, &p("cases.csv")).expect("bundled cases parse"),
        volumes: parse_volumes_str(volumes, &p("volumes.csv")).expect("bundled volumes parse"),
        origin: parse_origin_config_str(origin, &p("origin.json")).expect("bundled origin parses"),
    }
}

pub fn wuhan() -> Fixture {
    load(FixtureOrigin::Wuhan)
}

/// On-disk location of the bundled files (for CLI examples and tests).
pub fn fixture_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}
