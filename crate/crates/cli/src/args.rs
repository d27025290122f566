use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ifs_core::Scalar;

/// Exact certification, weak-separation witnesses, dimensions and parameter
/// scans for the six-map family `S_pqr`.
#[derive(Debug, Parser)]
#[command(name = "ifscert", version)]
pub struct Cli {
    /// Worker threads for parallel stages; defaults to available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Directory for JSON, CSV and SVG artifacts. Reports go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify that all first-level pieces meet only at the touch point.
    Certify(CertifyArgs),
    /// Search `(m, n)` for `G_n⁻¹ H_m` close to the identity.
    Wsp(WspArgs),
    /// Similarity, subsystem and box-counting dimensions.
    Dimension(DimensionArgs),
    /// Classify a grid of `q` values in `D_mn(p, r)`.
    Scan(ScanArgs),
    /// Draw the depth-k covers as an SVG bar diagram.
    Render(RenderArgs),
}

fn scalar(s: &str) -> Result<Scalar, String> {
    Scalar::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct Triple {
    /// Ratio of S_1, as "num/den" or an exact decimal.
    #[arg(long, default_value = "1/40", value_parser = scalar)]
    pub p: Scalar,
    /// Ratio magnitude of S_3.
    #[arg(long, default_value = "1/50", value_parser = scalar)]
    pub q: Scalar,
    /// Ratio magnitude of S_2, S_4, S_5, S_6.
    #[arg(long, default_value = "1/45", value_parser = scalar)]
    pub r: Scalar,
    /// Accept any ratios in (0, 1) instead of (0, 1/36).
    #[arg(long)]
    pub relaxed: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub triple: Triple,
    /// Scale below which overlapping hull pairs are reported unresolved.
    #[arg(long, default_value = "1e-12", value_parser = scalar)]
    pub eps: Scalar,
    /// Node budget per refined pair.
    #[arg(long, default_value_t = ifs_core::certify::DEFAULT_STEP_CAP)]
    pub step_cap: usize,
}

#[derive(Debug, Args)]
pub struct WspArgs {
    #[command(flatten)]
    pub triple: Triple,
    /// Stop once the ratio defect is at most this value.
    #[arg(long, default_value_t = 1e-3)]
    pub target: f64,
    #[arg(long, default_value_t = 50)]
    pub max_m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// The six-map family at --p/--q/--r.
    Spqr,
    /// Middle-thirds Cantor system.
    Cantor,
}

#[derive(Debug, Args)]
pub struct DimensionArgs {
    #[command(flatten)]
    pub triple: Triple,
    #[arg(long, value_enum, default_value_t = Preset::Spqr)]
    pub preset: Preset,
    /// Bisection tolerance on the Moran residual.
    #[arg(long, default_value_t = ifs_core::dimension::DEFAULT_TOL)]
    pub tol: f64,
    /// Last subsystem index `n` of the sequence `d_n`.
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    /// Deepest cover used for box counting (depths 1..=depth).
    #[arg(long, default_value_t = 5)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub triple: Triple,
    /// Branches to scan, e.g. "0:0,0:1".
    #[arg(long, default_value = "0:0", value_parser = parse_mn_list)]
    pub mn: MnList,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    /// Extra symbols per word before a pair counts as intersecting.
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// Samples for the displacement and anti-Lipschitz verifiers; 0 skips them.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    /// `|q − q'|` for the displacement verifier.
    #[arg(long, default_value = "1/1000000", value_parser = scalar)]
    pub delta: Scalar,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub triple: Triple,
    /// Deepest row drawn.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Largest depth accepted.
    #[arg(long, default_value_t = 8)]
    pub cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MnList(pub Vec<(usize, usize)>);

pub fn parse_mn_list(s: &str) -> Result<MnList, String> {
    let pairs = s
        .split(',')
        .map(|item| {
            let (m, n) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("expected m:n, got {item:?}"))?;
            let m = m.trim().parse().map_err(|_| format!("bad m in {item:?}"))?;
            let n = n.trim().parse().map_err(|_| format!("bad n in {item:?}"))?;
            Ok((m, n))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(MnList(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mn_list_parses_pairs() {
        assert_eq!(parse_mn_list("0:0, 0:1,2:3").unwrap(), MnList(vec![(0, 0), (0, 1), (2, 3)]));
        assert!(parse_mn_list("0-0").is_err());
        assert!(parse_mn_list("a:1").is_err());
    }

    #[test]
    fn decimals_parse_exactly() {
        let cli = Cli::try_parse_from(["ifscert", "certify", "--p", "0.025"]).unwrap();
        let Command::Certify(args) = cli.command else { panic!() };
        assert_eq!(args.triple.p, Scalar::new(1, 40));
    }
}
