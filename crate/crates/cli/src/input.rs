use std::fs;
use std::path::Path;

use lojax_core::family::{parse_complex_pair, GridPoint, Unfolding};
use lojax_core::milnor::Germ;
use lojax_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::args::GermArgs;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GermSpec {
    pub f: String,
    pub vars: Vec<String>,
}

/// One grid point: a single `[re, im]` pair when `k = 1`, else one pair per
/// parameter.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum GridEntry {
    Pair([String; 2]),
    Point(Vec<[String; 2]>),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub f: String,
    pub x_vars: Vec<String>,
    pub t_vars: Vec<String>,
    #[serde(default)]
    pub grid: Option<Vec<GridEntry>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn germ_spec(args: &GermArgs) -> Result<GermSpec> {
    match (&args.file, &args.expr) {
        (Some(path), _) => read_json(path),
        (None, Some(f)) => Ok(GermSpec { f: f.clone(), vars: args.vars.clone() }),
        (None, None) => Err(Error::InvalidInput("give a germ file or --f".into())),
    }
}

pub fn load_germ(spec: &GermSpec, degree_cap: u32) -> Result<Germ> {
    Ok(Germ::parse(&spec.f, &spec.vars)?.with_degree_cap(degree_cap))
}

pub fn family_spec(path: &Path) -> Result<FamilySpec> {
    read_json(path)
}

pub fn load_family(spec: &FamilySpec, degree_cap: u32) -> Result<Unfolding> {
    let u = Unfolding::parse(&spec.f, &spec.x_vars, &spec.t_vars)?;
    if degree_cap == u.degree_cap() {
        return Ok(u);
    }
    Unfolding::with_cap(u.f().clone(), u.m(), degree_cap)
}

pub fn parse_grid(entries: &[GridEntry], k: usize) -> Result<Vec<GridPoint>> {
    entries
        .iter()
        .map(|e| {
            let pairs: &[[String; 2]] = match e {
                GridEntry::Pair(p) => std::slice::from_ref(p),
                GridEntry::Point(ps) => ps,
            };
            if pairs.len() != k {
                return Err(Error::DimensionMismatch { expected: k, got: pairs.len() });
            }
            pairs.iter().map(|[re, im]| parse_complex_pair(re, im)).collect()
        })
        .collect()
}
