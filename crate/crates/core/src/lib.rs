//! Finite-window laboratory for sumsets, upper Banach density, polynomial
//! correlation counts, Weyl sums, intersective and Bohr sets, and Kronecker
//! and skew-product dynamics on the torus.
//!
//! The runnable programs under `examples/` are the main entry points:
//!
//! | example | capability |
//! |---|---|
//! | `sumset_basics` | bitset windows, translates and `A + B` |
//! | `banach_density` | upper Banach density and relative density |
//! | `ap_scan` | k-term progression counts and good-`n` scans |
//! | `weyl_profile` | Weyl averages of the sequence families |
//! | `intersective_sets` | `{n : {n^k α} ∈ (1/4, 3/4)}` with boundary flags |
//! | `bohr_sets` | Bohr and Nil-Bohr sets, gap statistics |
//! | `skew_product_correlation` | correlation sequences and Wiener exceedance |
//! | `cesaro_flattening` | greedy Cesàro selection and multiple correlations |
//! | `torus_recurrence` | `μ(D ∩ (D - p(n)α))` scans |
//! | `flagship_sumset_recurrence` | a full configured experiment |

pub mod density;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod progressions;
pub mod sequences;
pub mod structure;
pub mod windowset;

pub use error::{LabError, Result};
pub use windowset::{sumset, FiniteOffsets, Window, WindowSet};
