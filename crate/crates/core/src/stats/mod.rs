//! Rank-based comparison of methods over many datasets.

mod diagram;
mod hypothesis;
mod nemenyi;
mod rank;

pub use diagram::{cliques, emit_cd_diagram, CdDiagram};
pub use hypothesis::{
    friedman, ln_chi2_sf, paired_t_test, sign_test, sign_test_critical, sign_test_critical_exact,
    wilcoxon_signed_rank, wilcoxon_with, z_upper, SignTest, TestReport, WilcoxonMethod, WILCOXON_EXACT_MAX,
    WILCOXON_MIN_PAIRS,
};
pub use nemenyi::{nemenyi_cd, nemenyi_q, MAX_METHODS};
pub use rank::{rank_descending, RankTable};
