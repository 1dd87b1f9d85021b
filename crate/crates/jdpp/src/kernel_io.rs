//! Kernel JSON documents and named kernel generators.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{
    build_space, hermitian_eigen, hermitian_function, CMatrix, JKernelBundle, Kernel, SpacePartition, C64, DEFAULT_TOL,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coords {
    #[default]
    Flat,
    Pointwise,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: &dyn Fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(m[(i, j)])).collect()).collect()
        };
        MatrixDoc { re: rows(&|z| z.re), im: Some(rows(&|z| z.im)) }
    }

    pub fn to_matrix(&self, d: usize) -> Result<CMatrix> {
        let check = |rows: &Vec<Vec<f64>>| -> Result<()> {
            if rows.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: rows.len() });
            }
            for r in rows {
                if r.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: r.len() });
                }
            }
            Ok(())
        };
        check(&self.re)?;
        if let Some(im) = &self.im {
            check(im)?;
        }
        Ok(CMatrix::from_fn(d, d, |i, j| C64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))))
    }
}

/// `{d, sigma, part, matrix: {re, im}, coords}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelDocument {
    pub d: usize,
    pub sigma: Vec<f64>,
    pub part: Vec<u8>,
    pub matrix: MatrixDoc,
    #[serde(default)]
    pub coords: Coords,
}

impl KernelDocument {
    pub fn from_kernel(k: &Kernel, coords: Coords) -> Self {
        let space = k.space();
        let m = match coords {
            Coords::Flat => k.flat().clone(),
            Coords::Pointwise => k.pointwise_matrix(),
        };
        KernelDocument {
            d: space.d(),
            sigma: space.weights().to_vec(),
            part: space.labels(),
            matrix: MatrixDoc::from_matrix(&m),
            coords,
        }
    }

    pub fn to_kernel(&self) -> Result<Kernel> {
        let space = Arc::new(build_space(self.d, &self.sigma, &self.part)?);
        matrix_kernel(space, &self.matrix, self.coords)
    }
}

fn matrix_kernel(space: Arc<SpacePartition>, doc: &MatrixDoc, coords: Coords) -> Result<Kernel> {
    let m = doc.to_matrix(space.d())?;
    match coords {
        Coords::Flat => Kernel::from_flat(space, m),
        Coords::Pointwise => Kernel::from_pointwise(space, m),
    }
}

pub fn read_kernel(path: &Path) -> Result<Kernel> {
    let text = std::fs::read_to_string(path)?;
    let doc: KernelDocument = serde_json::from_str(&text)?;
    doc.to_kernel()
}

pub fn write_kernel(path: &Path, k: &Kernel, coords: Coords) -> Result<()> {
    let text = serde_json::to_string_pretty(&KernelDocument::from_kernel(k, coords))?;
    std::fs::write(path, text)?;
    Ok(())
}

fn default_scale() -> f64 {
    1.0
}

/// Kernel source addressable by name in experiment configs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum KernelSpec {
    Explicit {
        matrix: MatrixDoc,
        #[serde(default)]
        coords: Coords,
    },
    /// Random Hermitian matrix with eigenvalues mapped into (0,1) by the logistic function.
    RandomValid {
        seed: u64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Orthogonal projection onto a random rank-r subspace.
    ProjectionRankR { rank: usize, seed: u64 },
    /// Pointwise sin(πa(i−j))/(π(i−j)) with diagonal a, eigenvalues clipped into [0,1].
    DiscreteSine { a: f64 },
    /// A kernel document on disk; its own space must agree with the configured one.
    File { path: PathBuf },
}

pub fn generate(spec: &KernelSpec, space: Arc<SpacePartition>) -> Result<Kernel> {
    let d = space.d();
    match spec {
        KernelSpec::Explicit { matrix, coords } => matrix_kernel(space, matrix, *coords),
        KernelSpec::RandomValid { seed, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(random_valid_kernel(space, &mut rng, *scale))
        }
        KernelSpec::ProjectionRankR { rank, seed } => {
            if *rank > d {
                return Err(Error::InvalidKernel(format!("rank {rank} exceeds d = {d}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(random_projection_kernel(space, &mut rng, *rank))
        }
        KernelSpec::DiscreteSine { a } => {
            let pointwise = CMatrix::from_fn(d, d, |i, j| {
                let n = i as f64 - j as f64;
                if i == j {
                    C64::new(*a, 0.0)
                } else {
                    C64::new((PI * a * n).sin() / (PI * n), 0.0)
                }
            });
            let k = Kernel::from_pointwise(space.clone(), pointwise)?;
            Ok(clip_to_valid(&k))
        }
        KernelSpec::File { path } => {
            let k = read_kernel(path)?;
            if k.space().as_ref() != space.as_ref() {
                return Err(Error::InvalidKernel(format!(
                    "kernel file {} describes a different space",
                    path.display()
                )));
            }
            Ok(k)
        }
    }
}

/// Projects the Hermitian part of `k` onto eigenvalues in [0,1].
pub fn clip_to_valid(k: &Kernel) -> Kernel {
    let (values, vectors) = hermitian_eigen(k.flat());
    let flat = hermitian_function(&values, &vectors, |l| l.clamp(0.0, 1.0));
    Kernel::from_flat(k.space().clone(), flat).expect("same dimension")
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

pub fn random_valid_kernel<R: Rng>(space: Arc<SpacePartition>, rng: &mut R, scale: f64) -> Kernel {
    let d = space.d();
    let a = gaussian_matrix(rng, d, d);
    let h = (&a + a.adjoint()) * C64::new(0.5 * scale, 0.0);
    let (values, vectors) = hermitian_eigen(&h);
    let flat = hermitian_function(&values, &vectors, |l| 1.0 / (1.0 + (-l).exp()));
    Kernel::from_flat(space, flat).expect("same dimension")
}

pub fn random_projection_kernel<R: Rng>(space: Arc<SpacePartition>, rng: &mut R, rank: usize) -> Kernel {
    let d = space.d();
    let flat = if rank == 0 {
        CMatrix::zeros(d, d)
    } else {
        let q = gaussian_matrix(rng, d, rank).qr().q();
        &q * q.adjoint()
    };
    Kernel::from_flat(space, flat).expect("same dimension")
}

/// Random partition labels, and weights in [0.5, 2] unless `unit_weights`.
pub fn random_space<R: Rng>(rng: &mut R, d: usize, unit_weights: bool) -> Arc<SpacePartition> {
    let part: Vec<u8> = (0..d).map(|_| rng.random_range(1..=2u8)).collect();
    let sigma: Vec<f64> = (0..d).map(|_| if unit_weights { 1.0 } else { rng.random_range(0.5..2.0) }).collect();
    Arc::new(build_space(d, &sigma, &part).expect("valid random space"))
}

/// Random space and random valid kernel assembled into a bundle.
pub fn random_bundle(d: usize, seed: u64) -> JKernelBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_space(&mut rng, d, false);
    let k = random_valid_kernel(space, &mut rng, 1.5);
    crate::space::assemble_j_kernel(&k, DEFAULT_TOL).expect("logistic spectrum is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_roundtrip_pointwise() {
        let space = Arc::new(build_space(3, &[0.5, 0.5, 1.0], &[1, 1, 2]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = random_valid_kernel(space, &mut rng, 1.0);
        for coords in [Coords::Flat, Coords::Pointwise] {
            let doc = KernelDocument::from_kernel(&k, coords);
            let text = serde_json::to_string(&doc).unwrap();
            let back: KernelDocument = serde_json::from_str(&text).unwrap();
            let k2 = back.to_kernel().unwrap();
            assert!((k2.flat() - k.flat()).norm() < 1e-14);
        }
    }

    #[test]
    fn generators_are_valid() {
        let space = Arc::new(build_space(5, &[1.0; 5], &[1, 2, 1, 2, 2]).unwrap());
        let specs = [
            KernelSpec::RandomValid { seed: 3, scale: 1.0 },
            KernelSpec::ProjectionRankR { rank: 2, seed: 4 },
            KernelSpec::DiscreteSine { a: 0.4 },
        ];
        for spec in &specs {
            let k = generate(spec, space.clone()).unwrap();
            assert!(crate::space::validate_correlation_operator(&k, 1e-12).passed, "{spec:?}");
        }
        let p = generate(&specs[1], space).unwrap();
        assert!((p.flat() * p.flat() - p.flat()).norm() < 1e-12);
        let tr: f64 = p.flat().trace().re;
        assert!((tr - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spec_json_shape() {
        let spec: KernelSpec = serde_json::from_str(r#"{"generator":"projection-rank-r","rank":1,"seed":9}"#).unwrap();
        assert!(matches!(spec, KernelSpec::ProjectionRankR { rank: 1, seed: 9 }));
        let spec: KernelSpec =
            serde_json::from_str(r#"{"generator":"explicit","matrix":{"re":[[0.5,0.5],[0.5,0.5]]}}"#).unwrap();
        assert!(matches!(spec, KernelSpec::Explicit { coords: Coords::Flat, .. }));
    }
}
