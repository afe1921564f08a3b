use crate::error::{Error, Result};
use crate::model::SystemModel;

/// A point in a model's configuration chart, with optional cached energy.
///
/// The caches are only ever filled from a fresh evaluation at `coords`, and
/// the coordinates cannot be mutated afterwards, so a cache is always exact.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroState {
    coords: Vec<f64>,
    potential: Option<f64>,
    gradient: Option<Vec<f64>>,
    reaction_coordinate: Option<f64>,
}

impl MicroState {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index, value });
        }
        Ok(Self {
            coords,
            potential: None,
            gradient: None,
            reaction_coordinate: None,
        })
    }

    /// Builds a state with the potential cached.
    pub fn with_potential<M: SystemModel + ?Sized>(model: &M, coords: Vec<f64>) -> Result<Self> {
        let mut state = Self::new(coords)?;
        state.potential = Some(model.potential(&state.coords)?);
        Ok(state)
    }

    /// Builds a state with both potential and gradient cached.
    pub fn evaluated<M: SystemModel + ?Sized>(model: &M, coords: Vec<f64>) -> Result<Self> {
        let mut state = Self::new(coords)?;
        state.ensure_gradient(model)?;
        Ok(state)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn cached_potential(&self) -> Option<f64> {
        self.potential
    }

    pub fn cached_gradient(&self) -> Option<&[f64]> {
        self.gradient.as_deref()
    }

    pub fn cached_reaction_coordinate(&self) -> Option<f64> {
        self.reaction_coordinate
    }

    /// `ξ(coords)`, evaluating and caching it on first use.
    pub fn reaction_coordinate<M: SystemModel + ?Sized>(&mut self, model: &M) -> Result<f64> {
        match self.reaction_coordinate {
            Some(z) => Ok(z),
            None => {
                let z = model.reaction_coordinate().value(&self.coords)?;
                self.reaction_coordinate = Some(z);
                Ok(z)
            }
        }
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Potential at `coords`, evaluating and caching it on first use.
    pub fn potential<M: SystemModel + ?Sized>(&mut self, model: &M) -> Result<f64> {
        match self.potential {
            Some(v) => Ok(v),
            None => {
                let v = model.potential(&self.coords)?;
                self.potential = Some(v);
                Ok(v)
            }
        }
    }

    pub(crate) fn set_evaluated(&mut self, potential: f64, gradient: Vec<f64>) {
        debug_assert_eq!(gradient.len(), self.coords.len());
        self.potential = Some(potential);
        self.gradient = Some(gradient);
    }

    /// Fills both caches if the gradient is missing.
    pub fn ensure_gradient<M: SystemModel + ?Sized>(&mut self, model: &M) -> Result<()> {
        if self.gradient.is_none() {
            let mut grad = vec![0.0; self.coords.len()];
            let v = model.potential_and_gradient(&self.coords, &mut grad)?;
            self.potential = Some(v);
            self.gradient = Some(grad);
        }
        Ok(())
    }
}
