use crate::error::{Error, Result};

pub const DEFAULT_STATE_CAP: usize = 4096;

/// ISI trellis over one real dimension of the original (pre-target) alphabet.
///
/// A state holds the last `len(h_sd) - 1` symbol indices, most recent in the
/// least significant base-`M` digit.
#[derive(Clone, Debug)]
pub struct TrellisSpec {
    pub pam_levels: Vec<f64>,
    pub h_sd: Vec<f64>,
    num_states: usize,
    /// Noiseless output indexed by `state * M + input`.
    branch_outputs: Vec<f64>,
    next_states: Vec<usize>,
}

impl TrellisSpec {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_inputs(&self) -> usize {
        self.pam_levels.len()
    }

    pub fn num_branches(&self) -> usize {
        self.num_states * self.pam_levels.len()
    }

    pub fn memory(&self) -> usize {
        self.h_sd.len() - 1
    }

    /// Bits carried by one symbol of this dimension.
    pub fn bits_per_symbol(&self) -> usize {
        self.pam_levels.len().trailing_zeros() as usize
    }

    #[inline]
    pub fn branch_output(&self, state: usize, input: usize) -> f64 {
        self.branch_outputs[state * self.pam_levels.len() + input]
    }

    #[inline]
    pub fn next_state(&self, state: usize, input: usize) -> usize {
        self.next_states[state * self.pam_levels.len() + input]
    }

    /// Symbol indices held by a state, most recent first.
    pub fn state_symbols(&self, state: usize) -> Vec<usize> {
        let m = self.pam_levels.len();
        let mut s = state;
        (0..self.memory())
            .map(|_| {
                let d = s % m;
                s /= m;
                d
            })
            .collect()
    }
}

/// Enumerates states and branches for `pam_levels` through `h_sd`.
pub fn build_trellis(pam_levels: &[f64], h_sd: &[f64]) -> Result<TrellisSpec> {
    build_trellis_capped(pam_levels, h_sd, DEFAULT_STATE_CAP)
}

pub fn build_trellis_capped(pam_levels: &[f64], h_sd: &[f64], state_cap: usize) -> Result<TrellisSpec> {
    let m = pam_levels.len();
    if m < 2 {
        return Err(Error::param("trellis needs at least two levels"));
    }
    if !m.is_power_of_two() {
        return Err(Error::param("trellis alphabet size must be a power of two for bit labels"));
    }
    if h_sd.is_empty() {
        return Err(Error::param("effective filter is empty"));
    }
    let memory = h_sd.len() - 1;
    let mut num_states: usize = 1;
    for _ in 0..memory {
        num_states = num_states.saturating_mul(m);
        if num_states > state_cap {
            return Err(Error::Complexity { states: num_states, cap: state_cap });
        }
    }
    let mut branch_outputs = Vec::with_capacity(num_states * m);
    let mut next_states = Vec::with_capacity(num_states * m);
    for state in 0..num_states {
        for input in 0..m {
            let mut out = h_sd[0] * pam_levels[input];
            let mut s = state;
            for &h in &h_sd[1..] {
                out += h * pam_levels[s % m];
                s /= m;
            }
            branch_outputs.push(out);
            next_states.push((state * m + input) % num_states);
        }
    }
    Ok(TrellisSpec { pam_levels: pam_levels.to_vec(), h_sd: h_sd.to_vec(), num_states, branch_outputs, next_states })
}
