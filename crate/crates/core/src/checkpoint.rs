//! Plain-text model checkpoints.
//!
//! ```text
//! qrl-dsa-checkpoint 1
//! model vqc                      | model mlp
//! n_qubits 4                     | layer_sizes 4 64 64 2
//! n_blocks 5                     |
//! entangler cnot_ring            |
//! n_actions 2                    |
//! rotations z y z                |
//! array variational_angles 72    | array layer0.weights 256
//! <one value per line>           | <one value per line>
//! array encoding_scales 20       | array layer0.biases 64
//! ...                            | ...
//! array output_scales 2          |
//! ...                            |
//! end
//! ```
//!
//! Config lines come first in the order shown, then the named arrays in
//! parameter-layout order. Values are written in Rust's shortest
//! round-trip float notation, so a save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::MlpModel;
use crate::quantum::Axis;
use crate::vqc::{Entangler, VqcConfig, VqcModel};

const MAGIC: &str = "qrl-dsa-checkpoint 1";

#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Vqc(VqcModel),
    Mlp(MlpModel),
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::X => "x",
        Axis::Y => "y",
        Axis::Z => "z",
    }
}

fn push_array(out: &mut String, name: &str, values: &[f64]) {
    out.push_str(&format!("array {name} {}\n", values.len()));
    for v in values {
        out.push_str(&format!("{v:?}\n"));
    }
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC}\n");
        match self {
            Checkpoint::Vqc(model) => {
                let c = model.config();
                out.push_str("model vqc\n");
                out.push_str(&format!("n_qubits {}\n", c.n_qubits));
                out.push_str(&format!("n_blocks {}\n", c.n_blocks));
                out.push_str(&format!("entangler {}\n", c.entangler.as_str()));
                out.push_str(&format!("n_actions {}\n", c.n_actions));
                let axes: Vec<&str> = c.rotations.iter().map(|&a| axis_name(a)).collect();
                out.push_str(&format!("rotations {}\n", axes.join(" ")));
                push_array(&mut out, "variational_angles", model.variational_angles());
                push_array(&mut out, "encoding_scales", model.encoding_scales());
                push_array(&mut out, "output_scales", model.output_scales());
            }
            Checkpoint::Mlp(model) => {
                out.push_str("model mlp\n");
                let sizes: Vec<String> = model.layer_sizes().iter().map(usize::to_string).collect();
                out.push_str(&format!("layer_sizes {}\n", sizes.join(" ")));
                for l in 0..model.layer_sizes().len() - 1 {
                    let (weights, biases) = model.layer(l);
                    push_array(&mut out, &format!("layer{l}.weights"), weights);
                    push_array(&mut out, &format!("layer{l}.biases"), biases);
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines {
            inner: text.lines().enumerate(),
            line: 0,
        };
        let magic = lines.next_line()?;
        if magic != MAGIC {
            return Err(lines.error(format!("expected `{MAGIC}`, found `{magic}`")));
        }
        let kind = lines.field("model")?;
        let checkpoint = match kind.as_str() {
            "vqc" => {
                let n_qubits = lines.parse_field("n_qubits")?;
                let n_blocks = lines.parse_field("n_blocks")?;
                let entangler = match lines.field("entangler")?.as_str() {
                    "cnot_ring" => Entangler::CnotRing,
                    "cz_ring" => Entangler::CzRing,
                    other => return Err(lines.error(format!("unknown entangler `{other}`"))),
                };
                let n_actions = lines.parse_field("n_actions")?;
                let axes = lines.field("rotations")?;
                let axes: Vec<Axis> = axes
                    .split_whitespace()
                    .map(|a| match a {
                        "x" => Ok(Axis::X),
                        "y" => Ok(Axis::Y),
                        "z" => Ok(Axis::Z),
                        other => Err(lines.error(format!("unknown axis `{other}`"))),
                    })
                    .collect::<Result<_>>()?;
                let rotations: [Axis; 3] = axes
                    .try_into()
                    .map_err(|_| lines.error("rotations needs exactly three axes"))?;
                let config = VqcConfig {
                    n_qubits,
                    n_blocks,
                    entangler,
                    n_actions,
                    rotations,
                };
                let mut params = lines.array("variational_angles")?;
                params.extend(lines.array("encoding_scales")?);
                params.extend(lines.array("output_scales")?);
                Checkpoint::Vqc(VqcModel::from_parameters(config, params).map_err(|e| lines.error(e.to_string()))?)
            }
            "mlp" => {
                let sizes: Vec<usize> = lines
                    .field("layer_sizes")?
                    .split_whitespace()
                    .map(|s| s.parse().map_err(|_| lines.error(format!("bad layer size `{s}`"))))
                    .collect::<Result<_>>()?;
                let mut params = Vec::new();
                for l in 0..sizes.len().saturating_sub(1) {
                    params.extend(lines.array(&format!("layer{l}.weights"))?);
                    params.extend(lines.array(&format!("layer{l}.biases"))?);
                }
                Checkpoint::Mlp(MlpModel::from_parameters(sizes, params).map_err(|e| lines.error(e.to_string()))?)
            }
            other => return Err(lines.error(format!("unknown model kind `{other}`"))),
        };
        let end = lines.next_line()?;
        if end != "end" {
            return Err(lines.error(format!("expected `end`, found `{end}`")));
        }
        Ok(checkpoint)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

struct Lines<'a, I: Iterator<Item = (usize, &'a str)>> {
    inner: I,
    line: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Lines<'a, I> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Checkpoint {
            line: self.line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, text)) => {
                self.line = i + 1;
                Ok(text.trim_end())
            }
            None => Err(self.error("unexpected end of checkpoint")),
        }
    }

    /// Value of a `name value…` line.
    fn field(&mut self, name: &str) -> Result<String> {
        let text = self.next_line()?;
        match text.split_once(' ') {
            Some((key, value)) if key == name => Ok(value.to_string()),
            _ => Err(self.error(format!("expected `{name} …`, found `{text}`"))),
        }
    }

    fn parse_field<T: std::str::FromStr>(&mut self, name: &str) -> Result<T> {
        let value = self.field(name)?;
        value
            .parse()
            .map_err(|_| self.error(format!("bad value `{value}` for `{name}`")))
    }

    fn array(&mut self, name: &str) -> Result<Vec<f64>> {
        let header = self.field("array")?;
        let (found, len) = header
            .split_once(' ')
            .ok_or_else(|| self.error(format!("malformed array header `{header}`")))?;
        if found != name {
            return Err(self.error(format!("expected array `{name}`, found `{found}`")));
        }
        let len: usize = len
            .parse()
            .map_err(|_| self.error(format!("bad array length `{len}`")))?;
        (0..len)
            .map(|_| {
                let text = self.next_line()?;
                text.parse()
                    .map_err(|_| self.error(format!("bad number `{text}`")))
            })
            .collect()
    }
}
