//! Gaussian kernel density estimation and plug-in bandwidth selection.

mod bandwidth;
mod kernel;
mod sums;

pub use bandwidth::{
    amise, gamma_of_epsilon, optimal_bandwidth, pilot_bandwidths, pilot_bandwidths_for, select_bandwidth,
    silverman_bandwidth, silverman_for, solve_the_equation_bandwidth, spread, BandwidthMethod, BandwidthOptions,
    BandwidthReport, PlugIn, SpreadRule, NORMAL_CURVATURE, NORMAL_FOURTH, NORMAL_THIRD,
};
pub use kernel::{gaussian, gaussian_kernel_deriv, kde_eval, kde_on_sorted, MAX_KERNEL_DERIVATIVE};
pub use sums::{functional_norm_estimate, BinnedCounts, PairSums, Summation, AUTO_EXACT_LIMIT, DEFAULT_BINS};
