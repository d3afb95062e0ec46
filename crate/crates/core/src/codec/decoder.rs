//! Flooding sum-product decoding over the full lifted graph.

use crate::lifting::SparseBinary;
use crate::scalar::Real;

pub const DEFAULT_LLR_CLIP: f64 = 50.0;

/// `tanh(x / 2)` through a single exponential.
#[inline]
fn tanh_half<T: Real>(x: T) -> T {
    let e = (-x.abs()).exp();
    let t = (T::one() - e) / (T::one() + e);
    if x < T::zero() {
        -t
    } else {
        t
    }
}

/// `2 atanh(t)` through a single logarithm.
#[inline]
fn two_atanh<T: Real>(t: T) -> T {
    ((T::one() + t) / (T::one() - t)).ln()
}

/// Outcome of one decoding run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Hard decisions on every variable.
    pub bits: Vec<u8>,
    pub iterations: usize,
    /// Every check equation is satisfied.
    pub converged: bool,
}

/// Sum-product decoder. Message buffers are reused between frames, so one
/// instance serves one frame at a time.
#[derive(Debug, Clone)]
pub struct BpDecoder<T: Real> {
    n: usize,
    /// Edge `e` of check `r` lies in `chk_ptr[r]..chk_ptr[r + 1]`.
    chk_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    /// Edges of variable `v` in `var_ptr[v]..var_ptr[v + 1]` of `var_edges`.
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
    clip: T,
    c2v: Vec<T>,
    total: Vec<T>,
    scratch: Vec<T>,
}

impl<T: Real> BpDecoder<T> {
    pub fn new(h: &SparseBinary) -> Self {
        Self::with_clip(h, DEFAULT_LLR_CLIP)
    }

    pub fn with_clip(h: &SparseBinary, clip: f64) -> Self {
        let mut chk_ptr = vec![0];
        let mut edge_var = Vec::with_capacity(h.nnz());
        for r in 0..h.rows() {
            edge_var.extend_from_slice(h.row(r));
            chk_ptr.push(edge_var.len());
        }
        let n = h.cols();
        let mut var_ptr = vec![0usize; n + 1];
        for &v in &edge_var {
            var_ptr[v + 1] += 1;
        }
        for v in 0..n {
            var_ptr[v + 1] += var_ptr[v];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        let e = edge_var.len();
        BpDecoder {
            n,
            chk_ptr,
            edge_var,
            var_ptr,
            var_edges,
            clip: T::of(clip),
            c2v: vec![T::zero(); e],
            total: vec![T::zero(); n],
            scratch: Vec::new(),
        }
    }

    fn clamp(&self, x: T) -> T {
        x.max(-self.clip).min(self.clip)
    }

    fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.chk_ptr.windows(2).all(|w| {
            self.edge_var[w[0]..w[1]]
                .iter()
                .fold(0u8, |a, &v| a ^ bits[v])
                == 0
        })
    }

    /// Refreshes the a-posteriori totals and their hard decisions.
    fn hard(&mut self, llr: &[T], bits: &mut [u8]) {
        let zero = T::zero();
        for v in 0..self.n {
            let mut total = llr[v];
            for &e in &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]] {
                total = total + self.c2v[e];
            }
            self.total[v] = total;
            bits[v] = (total < zero) as u8;
        }
    }

    /// Decodes `llr` (positive favours 0) for at most `max_iter` iterations,
    /// stopping as soon as the hard decisions satisfy every check.
    pub fn decode(&mut self, llr: &[T], max_iter: usize) -> DecodeResult {
        assert_eq!(llr.len(), self.n, "LLR vector length");
        // tanh(x/2) saturates to 1 beyond this, so cap it to keep atanh finite
        let tmax = tanh_half(self.clip);
        let tmax = if tmax < T::one() {
            tmax
        } else {
            T::one() - T::epsilon()
        };
        let llr: Vec<T> = llr.iter().map(|&x| self.clamp(x)).collect();
        for c in self.c2v.iter_mut() {
            *c = T::zero();
        }
        let mut bits = vec![0u8; self.n];
        self.hard(&llr, &mut bits);
        if self.syndrome_ok(&bits) {
            return DecodeResult {
                bits,
                iterations: 0,
                converged: true,
            };
        }
        for it in 1..=max_iter {
            // variable-to-check messages are formed on the fly from the
            // totals; check-to-variable uses the tanh rule with prefix and
            // suffix products
            for r in 0..self.chk_ptr.len() - 1 {
                let (a, b) = (self.chk_ptr[r], self.chk_ptr[r + 1]);
                let d = b - a;
                self.scratch.clear();
                for e in a..b {
                    let m = self.total[self.edge_var[e]] - self.c2v[e];
                    self.scratch
                        .push(tanh_half(m.max(-self.clip).min(self.clip)));
                }
                let mut prefix = T::one();
                for k in 0..d {
                    self.c2v[a + k] = prefix;
                    prefix = prefix * self.scratch[k];
                }
                let mut suffix = T::one();
                for k in (0..d).rev() {
                    let t = (self.c2v[a + k] * suffix).max(-tmax).min(tmax);
                    self.c2v[a + k] = two_atanh(t);
                    suffix = suffix * self.scratch[k];
                }
            }
            self.hard(&llr, &mut bits);
            if self.syndrome_ok(&bits) {
                return DecodeResult {
                    bits,
                    iterations: it,
                    converged: true,
                };
            }
        }
        DecodeResult {
            bits,
            iterations: max_iter,
            converged: false,
        }
    }
}
