use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
        }
    }

    /// Width of the output layer.
    pub fn outputs(self) -> usize {
        match self {
            Task::Classification => NUM_CLASSES,
            Task::Regression => 2,
        }
    }
}

pub const NUM_CLASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Class(u8),
    /// Gaze (pitch, yaw) in radians.
    Gaze(f64, f64),
}

impl Target {
    pub fn class(self) -> Option<u8> {
        match self {
            Target::Class(c) => Some(c),
            Target::Gaze(..) => None,
        }
    }
}

/// An ordered list of inputs with their expected outputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Split {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Target>,
}

impl Split {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Target>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::invalid(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn push(&mut self, input: Vec<f64>, target: Target) {
        self.inputs.push(input);
        self.targets.push(target);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], Target)> {
        self.inputs
            .iter()
            .map(Vec::as_slice)
            .zip(self.targets.iter().copied())
    }

    pub fn select(&self, rows: &[usize]) -> Split {
        Split {
            inputs: rows.iter().map(|&r| self.inputs[r].clone()).collect(),
            targets: rows.iter().map(|&r| self.targets[r]).collect(),
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn union(&self, other: &Split) -> Split {
        let mut out = self.clone();
        out.inputs.extend(other.inputs.iter().cloned());
        out.targets.extend(other.targets.iter().copied());
        out
    }

    /// Content hash over inputs and targets.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (x, t) in self.iter() {
            for v in x {
                h.update(v.to_le_bytes());
            }
            match t {
                Target::Class(c) => h.update([0, c]),
                Target::Gaze(p, y) => {
                    h.update([1]);
                    h.update(p.to_le_bytes());
                    h.update(y.to_le_bytes());
                }
            }
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub task: Task,
    pub features: usize,
    pub train: Split,
    pub test: Split,
}

impl Dataset {
    pub fn new(task: Task, features: usize, train: Split, test: Split) -> Result<Self> {
        let ds = Self {
            task,
            features,
            train,
            test,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, split) in [("train", &self.train), ("test", &self.test)] {
            split.validate(self.task, self.features, name)?;
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.task.name());
        h.update(self.train.digest());
        h.update(self.test.digest());
        hex::encode(h.finalize())
    }

    /// Writes the dataset file: a `#` schema header line, a CSV header,
    /// then one row per input. Values are divided by `scale` on load.
    pub fn save(&self, path: &Path, scale: f64) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(
            out,
            "# metisforge-dataset version=1 task={} features={} scale={}",
            self.task.name(),
            self.features,
            scale
        )
        .map_err(io)?;
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["split".to_string()];
        match self.task {
            Task::Classification => header.push("label".into()),
            Task::Regression => header.extend(["pitch".into(), "yaw".into()]),
        }
        header.extend((0..self.features).map(|i| format!("f{i}")));
        wtr.write_record(&header)?;
        for (name, split) in [("train", &self.train), ("test", &self.test)] {
            for (x, t) in split.iter() {
                let mut rec = vec![name.to_string()];
                match t {
                    Target::Class(c) => rec.push(c.to_string()),
                    Target::Gaze(p, y) => rec.extend([p.to_string(), y.to_string()]),
                }
                rec.extend(x.iter().map(|v| {
                    // undo the division on load exactly when it came from an integer
                    let s = v * scale;
                    if scale != 1.0 && (s - s.round()).abs() < 1e-9 { s.round() } else { s }.to_string()
                }));
                wtr.write_record(&rec)?;
            }
        }
        wtr.flush().map_err(io)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = BufReader::new(file);
        let mut first = String::new();
        reader
            .read_line(&mut first)
            .map_err(|e| Error::io(path, e))?;
        let bad = |msg: String| Error::Parse {
            file: path.display().to_string(),
            offset: 0,
            message: msg,
        };
        let header = first
            .trim()
            .strip_prefix("# metisforge-dataset")
            .ok_or_else(|| bad("missing dataset schema header".into()))?;
        let (mut task, mut features, mut scale, mut version) = (None, None, 1.0, None);
        for kv in header.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| bad(format!("bad header field `{kv}`")))?;
            match k {
                "version" => version = v.parse::<u32>().ok(),
                "task" => {
                    task = Some(match v {
                        "classification" => Task::Classification,
                        "regression" => Task::Regression,
                        _ => return Err(bad(format!("unknown task `{v}`"))),
                    })
                }
                "features" => features = v.parse::<usize>().ok(),
                "scale" => {
                    scale = v
                        .parse::<f64>()
                        .map_err(|_| bad(format!("bad scale `{v}`")))?
                }
                _ => return Err(bad(format!("unknown header field `{k}`"))),
            }
        }
        if version != Some(1) {
            return Err(bad("unsupported dataset version".into()));
        }
        let task = task.ok_or_else(|| bad("header lacks task".into()))?;
        let features = features.ok_or_else(|| bad("header lacks features".into()))?;
        let target_cols = match task {
            Task::Classification => 1,
            Task::Regression => 2,
        };

        let mut rdr = csv::Reader::from_reader(reader);
        let (mut train, mut test) = (Split::default(), Split::default());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 1 + target_cols + features {
                return Err(bad(format!("row {row}: expected {} columns", 1 + target_cols + features)));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|_| bad(format!("row {row}: bad number `{}`", &rec[i])))
            };
            let target = match task {
                Task::Classification => Target::Class(
                    rec[1]
                        .parse::<u8>()
                        .map_err(|_| bad(format!("row {row}: bad label")))?,
                ),
                Task::Regression => Target::Gaze(num(1)?, num(2)?),
            };
            let x = (1 + target_cols..rec.len())
                .map(|i| num(i).map(|v| v / scale))
                .collect::<Result<Vec<_>>>()?;
            match &rec[0] {
                "train" => train.push(x, target),
                "test" => test.push(x, target),
                other => return Err(bad(format!("row {row}: unknown split `{other}`"))),
            }
        }
        Dataset::new(task, features, train, test)
    }
}

impl Split {
    pub fn validate(&self, task: Task, features: usize, name: &str) -> Result<()> {
        if self.inputs.len() != self.targets.len() {
            return Err(Error::invalid(format!("{name}: inputs and targets misaligned")));
        }
        for (i, (x, t)) in self.iter().enumerate() {
            if x.len() != features {
                return Err(Error::invalid(format!(
                    "{name} row {i}: {} features, expected {features}",
                    x.len()
                )));
            }
            let ok = match (task, t) {
                (Task::Classification, Target::Class(c)) => (c as usize) < NUM_CLASSES,
                (Task::Regression, Target::Gaze(p, y)) => p.is_finite() && y.is_finite(),
                _ => false,
            };
            if !ok {
                return Err(Error::invalid(format!("{name} row {i}: bad target {t:?}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let train = Split::new(
            vec![vec![0.0, 1.0], vec![0.5, 0.25]],
            vec![Target::Class(3), Target::Class(9)],
        )
        .unwrap();
        let test = Split::new(vec![vec![1.0, 0.0]], vec![Target::Class(0)]).unwrap();
        let ds = Dataset::new(Task::Classification, 2, train, test).unwrap();
        let p = dir.path().join("d.csv");
        ds.save(&p, 4.0).unwrap();
        assert_eq!(Dataset::load(&p).unwrap(), ds);

        let reg = Dataset::new(
            Task::Regression,
            1,
            Split::new(vec![vec![0.3]], vec![Target::Gaze(0.1, -0.2)]).unwrap(),
            Split::default(),
        )
        .unwrap();
        reg.save(&p, 1.0).unwrap();
        assert_eq!(Dataset::load(&p).unwrap(), reg);
    }

    #[test]
    fn rejects_misaligned_rows() {
        assert!(Split::new(vec![vec![1.0]], vec![]).is_err());
        let bad = Dataset::new(
            Task::Classification,
            2,
            Split::new(vec![vec![1.0]], vec![Target::Class(1)]).unwrap(),
            Split::default(),
        );
        assert!(bad.is_err());
    }
}
