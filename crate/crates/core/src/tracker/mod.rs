//! Mobility tracking: dataset generation, decision-tree and SVR regressors
//! predicting the legitimate vehicle's next position, and regression metrics.
//!
//! The feature vector has 9 entries — link quality (dB), three ToAs, their
//! three per-RSU differences against the previous slot, and the current
//! extracted position — and the label is the next slot's extracted position.

pub mod dataset;
pub mod metrics;
pub mod svr;
pub mod tree;

pub use dataset::{generate_dataset, GenConfig};
pub use metrics::{evaluate_predictions, RegressionMetrics};
pub use svr::{SvrModel, SvrParams};
pub use tree::{RegressionTree, TreeParams};

use crate::{Error, Result, Vec2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Number of input features per row.
pub const FEATURE_DIM: usize = 9;

/// One training record: 9 features and a 2-coordinate label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub lq_db: f64,
    /// ToAs at the 3 selected RSUs, seconds.
    pub toas: [f64; 3],
    /// Per-RSU ToA difference against the previous slot, seconds.
    pub toa_diffs: [f64; 3],
    /// Extracted position at the current slot.
    pub current_position: Vec2,
    /// Extracted position at the next slot.
    pub label_next_position: Vec2,
}

impl FeatureRow {
    pub fn features(&self) -> [f64; FEATURE_DIM] {
        [
            self.lq_db,
            self.toas[0],
            self.toas[1],
            self.toas[2],
            self.toa_diffs[0],
            self.toa_diffs[1],
            self.toa_diffs[2],
            self.current_position.x,
            self.current_position.y,
        ]
    }

    pub fn label(&self) -> Vec2 {
        self.label_next_position
    }
}

/// A collection of feature rows with CSV serialization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub rows: Vec<FeatureRow>,
}

/// Header of the dataset CSV format.
pub const DATASET_HEADER: &str = "lq_db,toa1,toa2,toa3,dtoa1,dtoa2,dtoa3,x,y,label_x,label_y";

impl Dataset {
    pub fn new(rows: Vec<FeatureRow>) -> Self {
        Dataset { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Write as CSV with full float precision (round-trips exactly).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{DATASET_HEADER}")?;
        for row in &self.rows {
            let f = row.features();
            let l = row.label();
            let mut fields = Vec::with_capacity(11);
            for v in f.iter().chain([l.x, l.y].iter()) {
                // 18 significant digits: always round-trips f64 exactly
                fields.push(format!("{v:.17e}"));
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, path: &str) -> Result<Dataset> {
        let bad = |reason: String| Error::Format {
            path: path.to_string(),
            reason,
        };
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty file".into()))?
            .map_err(Error::Io)?;
        if header.trim() != DATASET_HEADER {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(Error::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
            if fields.len() != 11 {
                return Err(bad(format!(
                    "line {}: expected 11 fields, got {}",
                    i + 2,
                    fields.len()
                )));
            }
            if fields.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("line {}: non-finite value", i + 2)));
            }
            rows.push(FeatureRow {
                lq_db: fields[0],
                toas: [fields[1], fields[2], fields[3]],
                toa_diffs: [fields[4], fields[5], fields[6]],
                current_position: Vec2::new(fields[7], fields[8]),
                label_next_position: Vec2::new(fields[9], fields[10]),
            });
        }
        Ok(Dataset { rows })
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Dataset> {
        let display = path.as_ref().display().to_string();
        let file = std::fs::File::open(path)?;
        Dataset::read_csv(BufReader::new(file), &display)
    }
}

/// Uniformly random, disjoint, exhaustive train/test partition. The training
/// split takes floor(ratio·n) rows.
pub fn split_dataset<R: Rng>(ds: &Dataset, ratio: f64, rng: &mut R) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split ratio must be in (0,1) (got {ratio})"
        )));
    }
    let n = ds.len();
    let n_train = (ratio * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidConfig(format!(
            "split of {n} rows at ratio {ratio} leaves an empty side"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(rng);
    let train = indices[..n_train].iter().map(|&i| ds.rows[i]).collect();
    let test = indices[n_train..].iter().map(|&i| ds.rows[i]).collect();
    Ok((Dataset::new(train), Dataset::new(test)))
}

/// Per-column z-score statistics, computed from the training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub feature_mean: [f64; FEATURE_DIM],
    pub feature_std: [f64; FEATURE_DIM],
    pub label_mean: [f64; 2],
    pub label_std: [f64; 2],
}

impl Normalization {
    pub fn fit(train: &Dataset) -> Result<Normalization> {
        if train.is_empty() {
            return Err(Error::InvalidConfig(
                "cannot normalize an empty dataset".into(),
            ));
        }
        let n = train.len() as f64;
        let mut fm = [0.0; FEATURE_DIM];
        let mut fs = [0.0; FEATURE_DIM];
        let mut lm = [0.0; 2];
        let mut ls = [0.0; 2];
        for row in &train.rows {
            let f = row.features();
            for (i, v) in f.iter().enumerate() {
                fm[i] += v;
            }
            lm[0] += row.label().x;
            lm[1] += row.label().y;
        }
        fm.iter_mut().for_each(|v| *v /= n);
        lm.iter_mut().for_each(|v| *v /= n);
        for row in &train.rows {
            let f = row.features();
            for (i, v) in f.iter().enumerate() {
                fs[i] += (v - fm[i]).powi(2);
            }
            ls[0] += (row.label().x - lm[0]).powi(2);
            ls[1] += (row.label().y - lm[1]).powi(2);
        }
        // Constant columns normalize to 0 rather than NaN.
        let finish = |s: f64| {
            let sd = (s / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        };
        fs.iter_mut().for_each(|v| *v = finish(*v));
        ls.iter_mut().for_each(|v| *v = finish(*v));
        Ok(Normalization {
            feature_mean: fm,
            feature_std: fs,
            label_mean: lm,
            label_std: ls,
        })
    }

    pub fn normalize_features(&self, f: &[f64; FEATURE_DIM]) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        for i in 0..FEATURE_DIM {
            out[i] = (f[i] - self.feature_mean[i]) / self.feature_std[i];
        }
        out
    }

    pub fn normalize_label(&self, l: Vec2, coord: usize) -> f64 {
        let v = if coord == 0 { l.x } else { l.y };
        (v - self.label_mean[coord]) / self.label_std[coord]
    }

    pub fn denormalize_label(&self, v: f64, coord: usize) -> f64 {
        v * self.label_std[coord] + self.label_mean[coord]
    }

    /// Like [`Normalization::fit`], but the label statistics describe the
    /// per-slot displacement (label minus the row's current position) rather
    /// than the absolute label. Absolute positions span the whole deployment
    /// region (σ on the order of km), so a solver tolerance expressed in
    /// label units would permit meter-scale systematic error; displacements
    /// live on the meter scale of one slot of motion plus localization
    /// noise, which keeps the same tolerance at the millimeter scale.
    pub fn fit_displacement(train: &Dataset) -> Result<Normalization> {
        let mut norm = Normalization::fit(train)?;
        let n = train.len() as f64;
        let mut lm = [0.0; 2];
        for row in &train.rows {
            let d = row.label() - row.current_position;
            lm[0] += d.x;
            lm[1] += d.y;
        }
        lm.iter_mut().for_each(|v| *v /= n);
        let mut ls = [0.0; 2];
        for row in &train.rows {
            let d = row.label() - row.current_position;
            ls[0] += (d.x - lm[0]).powi(2);
            ls[1] += (d.y - lm[1]).powi(2);
        }
        ls.iter_mut().for_each(|v| {
            let sd = (*v / n).sqrt();
            *v = if sd > 0.0 { sd } else { 1.0 };
        });
        norm.label_mean = lm;
        norm.label_std = ls;
        Ok(norm)
    }
}

/// Index of the current x (resp. y) coordinate within the feature vector.
pub const FEATURE_X: usize = 7;
/// Index of the current y coordinate within the feature vector.
pub const FEATURE_Y: usize = 8;

/// A trained position regressor: one submodel per output coordinate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regressor {
    DecisionTree {
        params: TreeParams,
        x: RegressionTree,
        y: RegressionTree,
    },
    Svr {
        params: SvrParams,
        normalization: Normalization,
        x: SvrModel,
        y: SvrModel,
    },
}

/// Model file version written by [`Regressor::save`].
pub const MODEL_VERSION: u32 = 1;
const MODEL_FORMAT: &str = "position-regressor";

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: Regressor,
}

impl Regressor {
    pub fn kind(&self) -> &'static str {
        match self {
            Regressor::DecisionTree { .. } => "dt",
            Regressor::Svr { .. } => "svr",
        }
    }

    /// Predicted next position for a 9-feature input.
    pub fn predict(&self, features: &[f64; FEATURE_DIM]) -> Vec2 {
        match self {
            Regressor::DecisionTree { x, y, .. } => {
                Vec2::new(x.predict(features), y.predict(features))
            }
            Regressor::Svr {
                normalization,
                x,
                y,
                ..
            } => {
                // The submodels regress the per-slot displacement; add back
                // the current position carried in the raw features.
                let f = normalization.normalize_features(features);
                Vec2::new(
                    normalization.denormalize_label(x.predict(&f), 0) + features[FEATURE_X],
                    normalization.denormalize_label(y.predict(&f), 1) + features[FEATURE_Y],
                )
            }
        }
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        let json = serde_json::to_string(&file)
            .map_err(|e| Error::InvalidConfig(format!("model serialization failed: {e}")))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Regressor> {
        let display = path.as_ref().display().to_string();
        let text =
            std::fs::read_to_string(&path).map_err(|_| Error::MissingModel(display.clone()))?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: display.clone(),
            reason: e.to_string(),
        })?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Format {
                path: display,
                reason: format!("not a model file (format {:?})", file.format),
            });
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Format {
                path: display,
                reason: format!("unsupported model version {}", file.version),
            });
        }
        Ok(file.model)
    }
}

/// Fit one CART regression tree per output coordinate on raw features.
pub fn fit_decision_tree(train: &Dataset, params: &TreeParams) -> Result<Regressor> {
    if train.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot fit on an empty dataset".into(),
        ));
    }
    let features: Vec<[f64; FEATURE_DIM]> = train.rows.iter().map(|r| r.features()).collect();
    let labels_x: Vec<f64> = train.rows.iter().map(|r| r.label().x).collect();
    let labels_y: Vec<f64> = train.rows.iter().map(|r| r.label().y).collect();
    let (x, y) = rayon::join(
        || tree::fit(&features, &labels_x, params),
        || tree::fit(&features, &labels_y, params),
    );
    Ok(Regressor::DecisionTree {
        params: params.clone(),
        x: x?,
        y: y?,
    })
}

/// Fit one ε-insensitive SVR per output coordinate. Features are z-scored
/// internally; the regression target is the z-scored per-slot displacement
/// (see [`Normalization::fit_displacement`]), and the ε tube is specified in
/// meters and converted to each coordinate's normalized scale.
pub fn fit_svr(train: &Dataset, params: &SvrParams) -> Result<Regressor> {
    if train.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot fit on an empty dataset".into(),
        ));
    }
    params.validate()?;
    let norm = Normalization::fit_displacement(train)?;
    let features: Vec<[f64; FEATURE_DIM]> = train
        .rows
        .iter()
        .map(|r| norm.normalize_features(&r.features()))
        .collect();
    let fit_coord = |coord: usize| -> Result<SvrModel> {
        let labels: Vec<f64> = train
            .rows
            .iter()
            .map(|r| norm.normalize_label(r.label() - r.current_position, coord))
            .collect();
        let mut p = params.clone();
        p.epsilon = params.epsilon / norm.label_std[coord];
        svr::fit(&features, &labels, &p)
    };
    let (x, y) = rayon::join(|| fit_coord(0), || fit_coord(1));
    Ok(Regressor::Svr {
        params: params.clone(),
        normalization: norm,
        x: x?,
        y: y?,
    })
}

/// Evaluate a trained model on a test split.
pub fn evaluate(model: &Regressor, test: &Dataset) -> Result<RegressionMetrics> {
    if test.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot evaluate on an empty dataset".into(),
        ));
    }
    let actual: Vec<Vec2> = test.rows.iter().map(|r| r.label()).collect();
    let predicted: Vec<Vec2> = test
        .rows
        .iter()
        .map(|r| model.predict(&r.features()))
        .collect();
    evaluate_predictions(&actual, &predicted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;

    fn toy_dataset(n: usize) -> Dataset {
        let rows = (0..n)
            .map(|i| {
                let t = i as f64;
                FeatureRow {
                    lq_db: t % 21.0,
                    toas: [1e-6 + 1e-9 * t, 2e-6, 3e-6 - 1e-9 * t],
                    toa_diffs: [1e-9, 0.0, -1e-9],
                    current_position: Vec2::new(10.0 * t, 5.0 + t),
                    label_next_position: Vec2::new(10.0 * t + 1.0, 5.0 + t),
                }
            })
            .collect();
        Dataset::new(rows)
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = toy_dataset(17);
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(DATASET_HEADER));
        let back = Dataset::read_csv(std::io::Cursor::new(&buf), "mem").unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn csv_rejects_bad_header_and_bad_rows() {
        let err = Dataset::read_csv(std::io::Cursor::new(b"a,b,c\n1,2,3\n"), "mem").unwrap_err();
        assert!(matches!(err, Error::Format { .. }));

        let text = format!("{DATASET_HEADER}\n1,2,3\n");
        let err = Dataset::read_csv(std::io::Cursor::new(text.as_bytes()), "mem").unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn split_floor_rule_and_exhaustive() {
        let ds = toy_dataset(10);
        let mut rng = substream(1, &[crate::rng::tag::DATASET_SPLIT]);
        let (train, test) = split_dataset(&ds, 0.999, &mut rng).unwrap();
        assert_eq!(train.len(), 9);
        assert_eq!(test.len(), 1);

        let (train, test) = split_dataset(&ds, 0.7, &mut rng).unwrap();
        assert_eq!(train.len(), 7);
        assert_eq!(test.len(), 3);
        let mut all: Vec<f64> = train
            .rows
            .iter()
            .chain(test.rows.iter())
            .map(|r| r.current_position.x)
            .collect();
        all.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (0..10).map(|i| 10.0 * i as f64).collect();
        assert_eq!(all, expected);
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let ds = toy_dataset(50);
        let mut a = substream(9, &[3]);
        let mut b = substream(9, &[3]);
        let (ta, _) = split_dataset(&ds, 0.7, &mut a).unwrap();
        let (tb, _) = split_dataset(&ds, 0.7, &mut b).unwrap();
        assert_eq!(ta, tb);
    }

    #[test]
    fn split_rejects_degenerate_ratios() {
        let ds = toy_dataset(10);
        let mut rng = substream(1, &[1]);
        assert!(split_dataset(&ds, 0.0, &mut rng).is_err());
        assert!(split_dataset(&ds, 1.0, &mut rng).is_err());
        assert!(split_dataset(&ds, 0.05, &mut rng).is_err()); // floor -> 0 train rows
    }

    #[test]
    fn normalization_zscores_columns() {
        let ds = toy_dataset(100);
        let norm = Normalization::fit(&ds).unwrap();
        let n = ds.len() as f64;
        let mut mean = 0.0;
        let mut var = 0.0;
        for row in &ds.rows {
            let z = norm.normalize_features(&row.features());
            mean += z[7];
            var += z[7] * z[7];
        }
        assert_relative_eq!(mean / n, 0.0, epsilon = 1e-10);
        assert_relative_eq!(var / n, 1.0, epsilon = 1e-10);
        // constant column (toa_diffs[1] = 0) must not produce NaN
        let z = norm.normalize_features(&ds.rows[0].features());
        assert!(z.iter().all(|v| v.is_finite()));
        // label round trip
        let l = ds.rows[3].label();
        let z0 = norm.normalize_label(l, 0);
        assert_relative_eq!(norm.denormalize_label(z0, 0), l.x, epsilon = 1e-9);
    }

    #[test]
    fn model_save_load_round_trip() {
        let ds = toy_dataset(60);
        let model = fit_decision_tree(&ds, &TreeParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let back = Regressor::load(&path).unwrap();
        for row in &ds.rows {
            assert_eq!(
                model.predict(&row.features()),
                back.predict(&row.features())
            );
        }
        assert!(matches!(
            Regressor::load(dir.path().join("missing.json")),
            Err(Error::MissingModel(_))
        ));
        std::fs::write(dir.path().join("junk.json"), "{}").unwrap();
        assert!(matches!(
            Regressor::load(dir.path().join("junk.json")),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn predict_is_deterministic() {
        let ds = toy_dataset(40);
        let model = fit_decision_tree(&ds, &TreeParams::default()).unwrap();
        let f = ds.rows[5].features();
        assert_eq!(model.predict(&f), model.predict(&f));
    }
}
