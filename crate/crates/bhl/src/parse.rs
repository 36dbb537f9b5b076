//! Text forms accepted on the command line and in config files.
//!
//! Weights: `standard:eta=1`, `logpow:alpha=-0.5,beta=0`, `table:path/to/samples.csv`.
//! Points: `re,im`.

use std::collections::BTreeMap;
use std::path::Path;

use bhl_core::weights::RadialWeight;
use bhl_core::Complex64;

pub fn parse_weight(text: &str) -> Result<RadialWeight, String> {
    let (family, rest) = text.split_once(':').unwrap_or((text, ""));
    match family.trim() {
        "standard" => {
            let params = key_values(rest, &["eta"])?;
            RadialWeight::standard(params.get("eta").copied().unwrap_or(0.0)).map_err(|e| e.to_string())
        }
        "logpow" => {
            let params = key_values(rest, &["alpha", "beta"])?;
            let alpha = *params.get("alpha").ok_or("logpow needs alpha=")?;
            RadialWeight::log_power(alpha, params.get("beta").copied().unwrap_or(0.0)).map_err(|e| e.to_string())
        }
        "table" => {
            if rest.is_empty() {
                return Err("table weight needs a file path, e.g. table:omega.csv".into());
            }
            let samples = read_samples(Path::new(rest))?;
            RadialWeight::tabulated(samples).map_err(|e| e.to_string())
        }
        other => Err(format!(
            "unknown weight family `{other}` (expected standard, logpow or table)"
        )),
    }
}

fn key_values(text: &str, allowed: &[&str]) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{item}`"))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(format!("unknown parameter `{k}` (allowed: {})", allowed.join(", ")));
        }
        let v: f64 = v.trim().parse().map_err(|_| format!("`{k}` is not a number: `{v}`"))?;
        if out.insert(k.to_string(), v).is_some() {
            return Err(format!("parameter `{k}` given twice"));
        }
    }
    Ok(out)
}

/// Two numeric columns r, ω(r); a non-numeric first row is taken as a header.
fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("{}: {e}", path.display()))?;
        let fields: Vec<&str> = record.iter().collect();
        if fields.len() != 2 {
            return Err(format!("{}:{}: expected two columns", path.display(), line + 1));
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(r), Ok(w)) => samples.push((r, w)),
            _ if line == 0 => {}
            _ => return Err(format!("{}:{}: not numeric", path.display(), line + 1)),
        }
    }
    Ok(samples)
}

pub fn parse_point(text: &str) -> Result<Complex64, String> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| format!("expected a point as re,im, got `{text}`"))?;
    let re: f64 = re.trim().parse().map_err(|_| format!("bad real part `{re}`"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part `{im}`"))?;
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bhl_core::weights::WeightKind;
    use std::io::Write;

    #[test]
    fn weight_grammar() {
        assert_eq!(
            parse_weight("standard:eta=1").unwrap().kind(),
            &WeightKind::Standard { eta: 1.0 }
        );
        assert_eq!(
            parse_weight("logpow:alpha=-0.5,beta=0").unwrap().kind(),
            &WeightKind::LogPower { alpha: -0.5, beta: 0.0 }
        );
        assert!(parse_weight("standard:eta=-2").is_err());
        assert!(parse_weight("standard:gamma=1").is_err());
        assert!(parse_weight("logpow:beta=1").is_err());
        assert!(parse_weight("gaussian").is_err());
    }

    #[test]
    fn table_weight_from_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "r,omega").unwrap();
        for k in 0..=100 {
            let r = 0.9995 * k as f64 / 100.0;
            writeln!(file, "{r},{}", 2.0 * (1.0 - r * r)).unwrap();
        }
        let w = parse_weight(&format!("table:{}", file.path().display())).unwrap();
        assert!((w.eval(0.5).unwrap() - 1.5).abs() < 1e-3);
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("-0.3, 0.2").unwrap(), Complex64::new(-0.3, 0.2));
        assert!(parse_point("0.3").is_err());
    }
}
