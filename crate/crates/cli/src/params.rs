//! Parameter resolution: built-in defaults, then an optional `key=value`
//! config file, then command-line flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use pbs_core::{ErrorStructure, OptionSpec, QuoteConfig};

use crate::error::CliError;

/// Parses a decimal number or a fraction such as `1/12`.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| format!("invalid number '{text}'"))?;
            let den: f64 = den.trim().parse().map_err(|_| format!("invalid number '{text}'"))?;
            num / den
        }
        None => text.parse().map_err(|_| format!("invalid number '{text}'"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{text}' is not a finite number"))
    }
}

/// `min:max:count`.
pub fn parse_strikes(text: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [min, max, count] = parts.as_slice() else {
        return Err(format!("strike grid '{text}' must be MIN:MAX:COUNT"));
    };
    let min = parse_number(min)?;
    let max = parse_number(max)?;
    let count: usize = count.trim().parse().map_err(|_| format!("invalid strike count '{count}'"))?;
    if !(min > 0.0 && max > min && count >= 2) {
        return Err(format!("strike grid '{text}' needs 0 < MIN < MAX and COUNT >= 2"));
    }
    Ok((min, max, count))
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// Spot price of the underlying.
    #[arg(long, value_parser = parse_number)]
    pub spot: Option<f64>,
    /// Strike (single quotes only).
    #[arg(long, value_parser = parse_number)]
    pub strike: Option<f64>,
    /// Maturity in years; fractions such as 1/12 are accepted.
    #[arg(long, value_parser = parse_number)]
    pub maturity: Option<f64>,
    /// Volatility of the underlying.
    #[arg(long, value_parser = parse_number)]
    pub sigma: Option<f64>,
    /// Drift of the underlying.
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Error scale; must be > 0.
    #[arg(long, value_parser = parse_number)]
    pub epsilon: Option<f64>,
    /// Bias coefficient A[sigma]; defaults to -5 sigma.
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub bias_coeff: Option<f64>,
    /// Variance coefficient Gamma[sigma]; defaults to sigma^2.
    #[arg(long, value_parser = parse_number)]
    pub var_coeff: Option<f64>,
    /// Half-spread in standard deviations.
    #[arg(long, value_parser = parse_number)]
    pub quantile_mult: Option<f64>,
    /// Strike grid for curves.
    #[arg(long, value_name = "MIN:MAX:COUNT", value_parser = parse_strikes)]
    pub strikes: Option<(f64, f64, usize)>,
    /// Seed for randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat key=value file; flags take precedence over its entries.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// Fully resolved parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub spot: f64,
    pub strike: f64,
    pub maturity: f64,
    pub sigma: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub bias_coeff: f64,
    pub var_coeff: f64,
    pub quantile_mult: f64,
    pub strikes: (f64, f64, usize),
    pub seed: u64,
}

const KEYS: [&str; 11] = [
    "spot", "strike", "maturity", "sigma", "mu", "epsilon", "bias-coeff", "var-coeff",
    "quantile-mult", "strikes", "seed",
];

fn read_config(path: &PathBuf) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{}:{}: expected key=value", path.display(), n + 1)));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("{}:{}: unknown key '{key}'", path.display(), n + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<Params, CliError> {
        let file = match &self.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let number = |flag: Option<f64>, key: &str, default: f64| -> Result<f64, CliError> {
            match (flag, file.get(key)) {
                (Some(v), _) => Ok(v),
                (None, Some(text)) => parse_number(text).map_err(|e| CliError::Usage(format!("config {key}: {e}"))),
                (None, None) => Ok(default),
            }
        };

        let sigma = number(self.sigma, "sigma", 0.2)?;
        let strikes = match (self.strikes, file.get("strikes")) {
            (Some(grid), _) => grid,
            (None, Some(text)) => parse_strikes(text).map_err(|e| CliError::Usage(format!("config strikes: {e}")))?,
            (None, None) => (85.0, 115.0, 31),
        };
        let seed = match (self.seed, file.get("seed")) {
            (Some(seed), _) => seed,
            (None, Some(text)) => text
                .parse()
                .map_err(|_| CliError::Usage(format!("config seed: invalid integer '{text}'")))?,
            (None, None) => 1,
        };

        let params = Params {
            spot: number(self.spot, "spot", 100.0)?,
            strike: number(self.strike, "strike", 100.0)?,
            maturity: number(self.maturity, "maturity", 1.0 / 12.0)?,
            sigma,
            mu: number(self.mu, "mu", 0.0)?,
            epsilon: number(self.epsilon, "epsilon", 0.02)?,
            bias_coeff: number(self.bias_coeff, "bias-coeff", -5.0 * sigma)?,
            var_coeff: number(self.var_coeff, "var-coeff", sigma * sigma)?,
            quantile_mult: number(self.quantile_mult, "quantile-mult", 1.0)?,
            strikes,
            seed,
        };
        params.validate()?;
        Ok(params)
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), CliError> {
        self.spec()?;
        self.error_structure()?;
        self.quote_config()?;
        Ok(())
    }

    pub fn spec(&self) -> Result<OptionSpec<f64>, CliError> {
        Ok(OptionSpec::new(self.spot, self.strike, self.maturity, self.sigma, self.mu)?)
    }

    pub fn error_structure(&self) -> Result<ErrorStructure<f64>, CliError> {
        Ok(ErrorStructure::new(self.epsilon, self.bias_coeff, self.var_coeff)?)
    }

    pub fn quote_config(&self) -> Result<QuoteConfig<f64>, CliError> {
        Ok(QuoteConfig::new(self.quantile_mult)?)
    }

    /// `eps |A| / sigma0` above one half: first-order results are unreliable.
    pub fn large_perturbation(&self) -> bool {
        self.error_structure().is_ok_and(|es| es.is_large_perturbation(self.sigma))
    }

    /// Every parameter as space-separated `key=value` pairs.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let (min, max, count) = self.strikes;
        write!(
            s,
            "spot={} strike={} maturity={} sigma={} mu={} epsilon={} bias-coeff={} var-coeff={} quantile-mult={} strikes={}:{}:{} seed={}",
            self.spot, self.strike, self.maturity, self.sigma, self.mu, self.epsilon,
            self.bias_coeff, self.var_coeff, self.quantile_mult, min, max, count, self.seed
        )
        .expect("writing to a String cannot fail");
        s
    }
}
