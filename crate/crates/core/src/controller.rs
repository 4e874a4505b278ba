//! Decoding genomes into wheel controllers.
//!
//! The phenotype is a reactive feedforward network with tanh units and a
//! constant bias input of 1.0 — no recurrence, no state across calls. Sensor
//! values arrive normalised to [0, 1] and both wheel outputs land in [-1, 1].

use crate::genome::Genome;
use serde::{Deserialize, Serialize};

/// Network shape. `n_inputs` counts sensor channels only; the bias input is
/// implicit in the weight layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerSpec {
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub n_outputs: usize,
}

impl ControllerSpec {
    pub fn new(n_inputs: usize, n_hidden: usize, n_outputs: usize) -> Self {
        Self { n_inputs, n_hidden, n_outputs }
    }

    /// The genome dimension this shape requires: one weight per input plus
    /// bias, for each unit of each layer.
    pub fn genome_dimension(&self) -> usize {
        if self.n_hidden > 0 {
            (self.n_inputs + 1) * self.n_hidden + (self.n_hidden + 1) * self.n_outputs
        } else {
            (self.n_inputs + 1) * self.n_outputs
        }
    }
}

/// A decoded phenotype. Immutable after `decode`, so it can be shared freely.
///
/// Weight layout in the genome: hidden rows first (each row is the unit's
/// input weights followed by its bias), then output rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    spec: ControllerSpec,
    hidden: Vec<f64>,
    output: Vec<f64>,
}

impl Controller {
    /// Deterministic, total mapping from genome to phenotype.
    ///
    /// Panics if the genome dimension does not match the spec; the runner
    /// validates this once at experiment start.
    pub fn decode(genome: &Genome, spec: ControllerSpec) -> Self {
        assert_eq!(
            genome.dimension(),
            spec.genome_dimension(),
            "genome dimension does not match controller spec"
        );
        let hidden_len = if spec.n_hidden > 0 { (spec.n_inputs + 1) * spec.n_hidden } else { 0 };
        Self {
            spec,
            hidden: genome.weights[..hidden_len].to_vec(),
            output: genome.weights[hidden_len..].to_vec(),
        }
    }

    pub fn spec(&self) -> ControllerSpec {
        self.spec
    }

    /// One feedforward pass: sensor vector in, wheel commands out.
    pub fn act(&self, sensors: &[f64]) -> (f64, f64) {
        assert_eq!(sensors.len(), self.spec.n_inputs, "sensor vector length mismatch");
        assert_eq!(self.spec.n_outputs, 2, "controller drives exactly two wheels");
        let outputs = if self.spec.n_hidden > 0 {
            let hidden: Vec<f64> = (0..self.spec.n_hidden)
                .map(|u| {
                    let row = &self.hidden[u * (self.spec.n_inputs + 1)..];
                    layer_unit(row, sensors)
                })
                .collect();
            (0..self.spec.n_outputs)
                .map(|u| {
                    let row = &self.output[u * (self.spec.n_hidden + 1)..];
                    layer_unit(row, &hidden)
                })
                .collect::<Vec<f64>>()
        } else {
            (0..self.spec.n_outputs)
                .map(|u| {
                    let row = &self.output[u * (self.spec.n_inputs + 1)..];
                    layer_unit(row, sensors)
                })
                .collect::<Vec<f64>>()
        };
        (outputs[0], outputs[1])
    }
}

/// tanh(w · [x; 1]) for one unit; `row` holds the input weights then the bias.
fn layer_unit(row: &[f64], inputs: &[f64]) -> f64 {
    let mut acc = row[inputs.len()]; // bias weight times the constant 1.0
    for (w, x) in row.iter().zip(inputs) {
        acc += w * x;
    }
    acc.tanh()
}
