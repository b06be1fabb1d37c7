//! Text forms of domains, maps, polynomial differentials and Möbius lists.

use std::path::PathBuf;
use std::sync::Arc;

use quasiextremal::cayley::DiskMobius;
use quasiextremal::fields::grid::{DomainGrid, DomainKind};
use quasiextremal::fields::MappingField;
use quasiextremal::hopf::QuadraticDifferentialField;
use quasiextremal::maps::{
    g_alpha, random_boundary_identity_map, random_smooth_diffeomorphism, Affine, AnalyticMap, Bump, BumpPerturbation,
    Identity, LinearStretch, RadialPower, RimFixedShear,
};
use quasiextremal::ode::{build_half_plane_map, ProfileSpec, StepControl};
use quasiextremal::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};
use crate::io;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Comma-separated floats, exactly `counts` of them (any listed length).
fn floats(s: &str, what: &str, counts: &[usize]) -> CliResult<Vec<f64>> {
    let v = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad number '{}' in {what}", t.trim())))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if !counts.contains(&v.len()) {
        return Err(usage(format!("{what} takes {counts:?} numbers, got {}", v.len())));
    }
    Ok(v)
}

fn one_float(s: &str, what: &str) -> CliResult<f64> {
    Ok(floats(s, what, &[1])?[0])
}

pub fn parse_domain(s: &str) -> CliResult<DomainKind> {
    let s = s.trim();
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    match head {
        "disk" if rest.is_empty() => Ok(DomainKind::UnitDisk),
        "half" => {
            let v = floats(rest, "half:W,YMIN,YMAX", &[3])?;
            Ok(DomainKind::HalfPlane {
                half_width: v[0],
                y_min: v[1],
                y_max: v[2],
            })
        }
        "rect" => {
            let v = floats(rest, "rect:X0,X1,Y0,Y1", &[4])?;
            Ok(DomainKind::Rectangle {
                x_min: v[0],
                x_max: v[1],
                y_min: v[2],
                y_max: v[3],
            })
        }
        _ => Err(usage(format!(
            "unknown domain '{s}' (disk, half:W,YMIN,YMAX, rect:X0,X1,Y0,Y1)"
        ))),
    }
}

pub fn domain_name(kind: &DomainKind) -> &'static str {
    match kind {
        DomainKind::UnitDisk => "disk",
        DomainKind::HalfPlane { .. } => "half",
        DomainKind::Rectangle { .. } => "rect",
    }
}

pub fn build_grid(kind: DomainKind, n: usize) -> CliResult<Arc<DomainGrid>> {
    Ok(Arc::new(DomainGrid::new(kind, n)?))
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapSpec {
    Identity,
    Conj,
    Linear(f64),
    GAlpha(f64),
    Radial(f64),
    Shear(f64),
    Affine(Affine),
    Bump(Bump),
    Random,
    Smooth,
    Ode(ProfileSpec),
    File(PathBuf),
}

impl MapSpec {
    pub fn parse(s: &str) -> CliResult<MapSpec> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let bare = |m: MapSpec| {
            if rest.is_empty() {
                Ok(m)
            } else {
                Err(usage(format!("map '{head}' takes no parameters")))
            }
        };
        match head {
            "identity" => bare(MapSpec::Identity),
            "conj" => bare(MapSpec::Conj),
            "random" => bare(MapSpec::Random),
            "smooth" => bare(MapSpec::Smooth),
            "linear" => Ok(MapSpec::Linear(one_float(rest, "linear:ALPHA")?)),
            "g-alpha" => Ok(MapSpec::GAlpha(one_float(rest, "g-alpha:ALPHA")?)),
            "radial" => Ok(MapSpec::Radial(one_float(rest, "radial:S")?)),
            "shear" => Ok(MapSpec::Shear(one_float(rest, "shear:EPS")?)),
            "affine" => {
                let v = floats(rest, "affine:ARE,AIM,BRE,BIM[,CRE,CIM]", &[4, 6])?;
                let c = if v.len() == 6 {
                    Complex64::new(v[4], v[5])
                } else {
                    Complex64::new(0.0, 0.0)
                };
                Ok(MapSpec::Affine(Affine {
                    a: Complex64::new(v[0], v[1]),
                    b: Complex64::new(v[2], v[3]),
                    c,
                }))
            }
            "bump" => {
                let v = floats(rest, "bump:CX,CY,R,DX,DY,BOUND", &[6])?;
                if v[2].is_nan() || v[2] <= 0.0 {
                    return Err(usage("bump radius must be positive"));
                }
                let dir = Complex64::new(v[3], v[4]);
                if dir.norm() == 0.0 {
                    return Err(usage("bump direction must be nonzero"));
                }
                Ok(MapSpec::Bump(Bump::with_gradient_bound(
                    Complex64::new(v[0], v[1]),
                    v[2],
                    dir,
                    v[5],
                )))
            }
            "ode" => Ok(MapSpec::Ode(ProfileSpec::parse(rest)?)),
            "file" if !rest.is_empty() => Ok(MapSpec::File(PathBuf::from(rest))),
            _ => Err(usage(format!("unknown map '{s}'"))),
        }
    }

    fn scalable(&self) -> bool {
        matches!(self, MapSpec::Bump(_) | MapSpec::Random | MapSpec::Smooth)
    }

    /// Sample the map on `grid`. `scale` multiplies the perturbation of
    /// bump-type maps and must be 1 for the others.
    pub fn build(&self, grid: &Arc<DomainGrid>, seed: u64, scale: f64) -> CliResult<MappingField> {
        if scale != 1.0 && !self.scalable() {
            return Err(usage("scale applies only to bump, random and smooth maps"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = match self {
            MapSpec::Identity => Identity.field(grid)?,
            MapSpec::Conj => MappingField::from_fn(grid.clone(), |z| z.conj())?,
            MapSpec::Linear(alpha) => LinearStretch { alpha: *alpha }.field(grid)?,
            MapSpec::GAlpha(alpha) => g_alpha(*alpha).field(grid)?,
            MapSpec::Radial(s) => RadialPower { s: *s }.field(grid)?,
            MapSpec::Shear(eps) => RimFixedShear { eps: *eps }.field(grid)?,
            MapSpec::Affine(a) => a.field(grid)?,
            MapSpec::Bump(b) => BumpPerturbation { bumps: vec![*b] }.scaled(scale).field(grid)?,
            MapSpec::Random => random_boundary_identity_map(&mut rng, grid).scaled(scale).field(grid)?,
            MapSpec::Smooth => random_smooth_diffeomorphism(&mut rng).scaled(scale).field(grid)?,
            MapSpec::Ode(spec) => {
                let profile = spec.solve(StepControl::default())?;
                build_half_plane_map(&profile, grid)?
            }
            MapSpec::File(path) => io::read_field(path, grid)?,
        };
        Ok(field)
    }
}

/// A real-coefficient polynomial in `w`, e.g. `1+w3`, `0.5w2-w`, `2*w^4`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub text: String,
    pub terms: Vec<(f64, i32)>,
}

impl Polynomial {
    pub fn parse(s: &str) -> CliResult<Polynomial> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(usage("empty polynomial"));
        }
        let mut terms = Vec::new();
        let mut rest = text.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' => (1.0, &rest[1..]),
                b'-' => (-1.0, &rest[1..]),
                _ => (1.0, rest),
            };
            let b = body.as_bytes();
            let end = (1..b.len())
                .find(|&i| (b[i] == b'+' || b[i] == b'-') && !matches!(b[i - 1], b'e' | b'E'))
                .unwrap_or(b.len());
            let term = &body[..end];
            rest = &body[end..];
            let bad = || usage(format!("bad term '{term}' in polynomial '{text}'"));
            let (coef, power) = match term.split_once('w') {
                None => (term.parse::<f64>().map_err(|_| bad())?, 0),
                Some((c, p)) => {
                    let c = c.strip_suffix('*').unwrap_or(c);
                    let c = if c.is_empty() {
                        1.0
                    } else {
                        c.parse::<f64>().map_err(|_| bad())?
                    };
                    let p = p.strip_prefix('^').unwrap_or(p);
                    let p = if p.is_empty() {
                        1
                    } else {
                        p.parse::<i32>().map_err(|_| bad())?
                    };
                    if !(0..=64).contains(&p) {
                        return Err(bad());
                    }
                    (c, p)
                }
            };
            terms.push((sign * coef, power));
        }
        Ok(Polynomial { text, terms })
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.terms.iter().map(|&(c, p)| c * w.powi(p)).sum()
    }

    pub fn field(&self, grid: &Arc<DomainGrid>) -> QuadraticDifferentialField {
        QuadraticDifferentialField::from_fn(grid.clone(), |w| self.eval(w))
    }
}

pub fn parse_polynomials(s: &str) -> CliResult<Vec<Polynomial>> {
    s.split(',').map(Polynomial::parse).collect()
}

/// `ARE,AIM,THETA` triples separated by `;`.
pub fn parse_mobius_list(s: &str) -> CliResult<Vec<DiskMobius>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let v = floats(t, "Möbius ARE,AIM,THETA", &[3])?;
            Ok(DiskMobius::new(Complex64::new(v[0], v[1]), v[2])?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains() {
        assert_eq!(parse_domain("disk").unwrap(), DomainKind::UnitDisk);
        assert!(
            matches!(parse_domain("half:4,0.01,8").unwrap(), DomainKind::HalfPlane { half_width, .. } if half_width == 4.0)
        );
        assert!(parse_domain("half:4,0.01").is_err());
        assert!(parse_domain("annulus").is_err());
    }

    #[test]
    fn maps() {
        assert_eq!(MapSpec::parse("linear:2").unwrap(), MapSpec::Linear(2.0));
        assert!(matches!(
            MapSpec::parse("bump:0,0,0.5,1,0,0.3").unwrap(),
            MapSpec::Bump(_)
        ));
        assert!(matches!(
            MapSpec::parse("ode:psi=power:2;lambda=1").unwrap(),
            MapSpec::Ode(_)
        ));
        assert!(MapSpec::parse("identity:3").is_err());
        assert!(MapSpec::parse("bump:0,0,0,1,0,0.3").is_err());
        assert!(MapSpec::parse("spiral").is_err());
    }

    #[test]
    fn scale_only_for_bumps() {
        let g = build_grid(DomainKind::UnitDisk, 16).unwrap();
        assert!(MapSpec::Identity.build(&g, 0, 0.5).is_err());
        assert!(MapSpec::Smooth.build(&g, 0, 0.5).is_ok());
    }

    #[test]
    fn polynomials() {
        let p = Polynomial::parse("1 + w3").unwrap();
        assert_eq!(p.terms, vec![(1.0, 0), (1.0, 3)]);
        let q = Polynomial::parse("0.5w2-w+2*w^4").unwrap();
        assert_eq!(q.terms, vec![(0.5, 2), (-1.0, 1), (2.0, 4)]);
        let w = Complex64::new(0.3, -0.2);
        let direct = 0.5 * w * w - w + 2.0 * w.powi(4);
        assert!((q.eval(w) - direct).norm() < 1e-15);
        assert_eq!(Polynomial::parse("1e-3w-2").unwrap().terms, vec![(1e-3, 1), (-2.0, 0)]);
        assert!(Polynomial::parse("w^x").is_err());
        assert!(Polynomial::parse("").is_err());
        assert_eq!(parse_polynomials("1,w,w2,1+w3").unwrap().len(), 4);
    }

    #[test]
    fn mobius_list() {
        assert_eq!(parse_mobius_list("0.3,0,1; -0.2,0.4,0").unwrap().len(), 2);
        assert!(parse_mobius_list("1.2,0,0").is_err());
    }
}
