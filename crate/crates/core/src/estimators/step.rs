//! Right-continuous piecewise-constant functions over time, the
//! representation of every estimate curve.

/// A right-continuous step function: `initial` before the first breakpoint,
/// then `values[i]` on `[breakpoints[i], breakpoints[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    initial: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// Builds a step function from `(time, value)` points with strictly
    /// increasing times.
    ///
    /// # Panics
    /// Panics if times are not strictly increasing or lengths disagree.
    pub fn new(initial: f64, points: Vec<(f64, f64)>) -> Self {
        let mut breakpoints = Vec::with_capacity(points.len());
        let mut values = Vec::with_capacity(points.len());
        for (t, v) in points {
            breakpoints.push(t);
            values.push(v);
        }
        Self::from_parts(initial, breakpoints, values)
    }

    pub fn from_parts(initial: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(breakpoints.len(), values.len());
        assert!(
            breakpoints.windows(2).all(|w| w[0] < w[1]),
            "breakpoints must be strictly increasing"
        );
        Self {
            initial,
            breakpoints,
            values,
        }
    }

    /// The constant function `value`.
    pub fn constant(value: f64) -> Self {
        Self {
            initial: value,
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Value at `t` (right-continuous: a breakpoint's value applies at the
    /// breakpoint itself).
    pub fn value_at(&self, t: f64) -> f64 {
        match self.breakpoints.partition_point(|&b| b <= t) {
            0 => self.initial,
            i => self.values[i - 1],
        }
    }

    /// Left limit at `t`: the value just before `t`.
    pub fn left_limit(&self, t: f64) -> f64 {
        match self.breakpoints.partition_point(|&b| b < t) {
            0 => self.initial,
            i => self.values[i - 1],
        }
    }

    /// Value before the first breakpoint.
    pub fn initial_value(&self) -> f64 {
        self.initial
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(time, value)` pairs in breakpoint order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.iter().copied().zip(self.values.iter().copied())
    }

    /// Applies `f` to the initial value and every breakpoint value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            initial: f(self.initial),
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queries_are_right_continuous_with_left_limits() {
        let f = StepFunction::new(1.0, vec![(1.0, 0.5), (2.0, 0.25)]);
        assert_eq!(f.value_at(0.0), 1.0);
        assert_eq!(f.value_at(0.999), 1.0);
        assert_eq!(f.value_at(1.0), 0.5);
        assert_eq!(f.value_at(1.5), 0.5);
        assert_eq!(f.value_at(2.0), 0.25);
        assert_eq!(f.value_at(100.0), 0.25);

        assert_eq!(f.left_limit(1.0), 1.0);
        assert_eq!(f.left_limit(1.5), 0.5);
        assert_eq!(f.left_limit(2.0), 0.5);
        assert_eq!(f.left_limit(2.5), 0.25);
    }

    #[test]
    fn constant_function() {
        let f = StepFunction::constant(0.0);
        assert_eq!(f.value_at(0.0), 0.0);
        assert_eq!(f.left_limit(42.0), 0.0);
        assert!(f.breakpoints().is_empty());
    }

    #[test]
    #[should_panic(expected = "strictly increasing")]
    fn rejects_unsorted_breakpoints() {
        StepFunction::new(0.0, vec![(2.0, 1.0), (1.0, 2.0)]);
    }

    #[test]
    fn map_preserves_breakpoints() {
        let f = StepFunction::new(1.0, vec![(1.0, 0.5)]);
        let g = f.map(|v| 1.0 - v);
        assert_eq!(g.initial_value(), 0.0);
        assert_eq!(g.value_at(1.0), 0.5);
        assert_eq!(g.breakpoints(), f.breakpoints());
    }
}
