//! Writes the reference problems as TOML files into the given directory.

use std::path::PathBuf;

use advlim::catalog::{cases, constant_v, CatalogCase, Family};
use advlim::eig2d::{rectangle_example, torus_example};
use advlim::io::{problem_to_toml, spec2d_to_toml};
use advlim::SignClass;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/cli/examples".into()));
    std::fs::create_dir_all(dir.join("catalog"))?;
    for case in cases() {
        std::fs::write(dir.join("catalog").join(format!("{}.toml", case.name())), problem_to_toml(&case.spec))?;
    }
    std::fs::write(dir.join("constantV.toml"), problem_to_toml(&constant_v()))?;
    let fig2a = CatalogCase::new(Family::Fig2a, (SignClass::Zero, SignClass::Zero));
    std::fs::write(dir.join("fig2a.toml"), problem_to_toml(&fig2a.spec))?;
    let fig1b = CatalogCase::new(Family::Fig1b, (SignClass::Plus, SignClass::Plus));
    std::fs::write(dir.join("fig1b_plusplus.toml"), problem_to_toml(&fig1b.spec))?;
    std::fs::write(dir.join("torus.toml"), spec2d_to_toml(&torus_example()))?;
    std::fs::write(dir.join("rectangle.toml"), spec2d_to_toml(&rectangle_example()))?;
    Ok(())
}
