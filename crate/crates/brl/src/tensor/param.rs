/// Flat parameter storage with a gradient buffer of equal length.
#[derive(Debug, Clone)]
pub struct ParamVector {
    values: Vec<f64>,
    grads: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
            grads: vec![0.0; len],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        let grads = vec![0.0; values.len()];
        Self { values, grads }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn grads(&self) -> &[f64] {
        &self.grads
    }

    pub fn grads_mut(&mut self) -> &mut [f64] {
        &mut self.grads
    }

    /// Disjoint mutable values / shared grads, for optimizer inner loops.
    pub fn split_mut(&mut self) -> (&mut [f64], &[f64]) {
        (&mut self.values, &self.grads)
    }

    /// Sets every gradient to exactly 0.
    pub fn zero_grads(&mut self) {
        self.grads.fill(0.0);
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn grads_finite(&self) -> bool {
        self.grads.iter().all(|g| g.is_finite())
    }
}
