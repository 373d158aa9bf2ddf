// SPDX-License-Identifier: Apache-2.0

//! Reference data shipped inside the binary.

pub const ARIA2_LIKE: &str = include_str!("../data/aria2_like.scenario");
pub const HEAVYTAIL_145: &str = include_str!("../data/heavytail_145.scenario");
pub const EMPTY: &str = include_str!("../data/empty.scenario");
pub const DEFAULT_SCALING: &str = include_str!("../data/default_scaling.toml");

pub const FILES: [(&str, &str); 4] = [
    ("aria2_like.scenario", ARIA2_LIKE),
    ("heavytail_145.scenario", HEAVYTAIL_145),
    ("empty.scenario", EMPTY),
    ("default_scaling.toml", DEFAULT_SCALING),
];

/// Contents of a bundled file by its file name.
pub fn lookup(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
