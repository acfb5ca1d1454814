//! Unitary lab ↔ KH transformation
//! `ψ_KH(x, t) = exp(iS(t)/2 − iA(t)(x + α(t)))·ψ_L(x + α(t), t)`.

use crate::laser::{FieldCache, FieldSample};
use crate::{Complex, Error, Frame, Result, SpatialGrid, Spectral, WaveFunction};

#[derive(Debug, Clone)]
pub struct FrameTransform<'a> {
    cache: &'a FieldCache,
    spectral: Spectral,
}

impl<'a> FrameTransform<'a> {
    pub fn new(cache: &'a FieldCache, grid: SpatialGrid) -> Result<Self> {
        Ok(Self {
            cache,
            spectral: Spectral::new(grid)?,
        })
    }

    pub fn cache(&self) -> &FieldCache {
        self.cache
    }

    fn sample(&self, t: f64) -> Result<FieldSample> {
        let end = self.cache.t_end();
        if !(0.0..=end).contains(&t) {
            return Err(Error::TimeOutOfRange { t, start: 0.0, end });
        }
        Ok(self.cache.sample(t))
    }

    fn apply_phase(psi: &mut WaveFunction, f: &FieldSample, sign: f64) {
        let grid = *psi.grid();
        for (j, z) in psi.amplitudes_mut().iter_mut().enumerate() {
            let x = grid.x(j);
            *z *= Complex::from_polar(1.0, sign * (0.5 * f.s - f.a * (x + f.alpha)));
        }
    }

    pub fn lab_to_kh(&self, psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
        psi.expect_frame(Frame::Lab)?;
        let f = self.sample(t)?;
        let mut out = self.spectral.shift(psi, -f.alpha);
        Self::apply_phase(&mut out, &f, 1.0);
        Ok(out.with_frame(Frame::Kh))
    }

    pub fn kh_to_lab(&self, psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
        psi.expect_frame(Frame::Kh)?;
        let f = self.sample(t)?;
        let mut out = psi.clone();
        Self::apply_phase(&mut out, &f, -1.0);
        self.spectral.shift_in_place(&mut out, f.alpha);
        Ok(out.with_frame(Frame::Lab))
    }

    /// Dispatches on the state's frame tag.
    pub fn to_frame(&self, psi: &WaveFunction, t: f64, target: Frame) -> Result<WaveFunction> {
        match (psi.frame(), target) {
            (a, b) if a == b => Ok(psi.clone()),
            (Frame::Lab, Frame::Kh) => self.lab_to_kh(psi, t),
            _ => self.kh_to_lab(psi, t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laser::PulseParams;

    fn setup() -> (FieldCache, SpatialGrid) {
        let p = PulseParams::production();
        (
            FieldCache::build(p, 0.025, p.t_final()).unwrap(),
            SpatialGrid::new(-200.0, 200.0, 2048).unwrap(),
        )
    }

    fn mean_x(psi: &WaveFunction) -> f64 {
        let dx = psi.grid().dx();
        psi.grid().points().zip(psi.density()).map(|(x, d)| x * d * dx).sum()
    }

    #[test]
    fn identity_before_pulse() {
        let (cache, g) = setup();
        let tr = FrameTransform::new(&cache, g).unwrap();
        let psi = WaveFunction::gaussian(g, Frame::Lab, 3.0, 2.0, 0.1);
        let kh = tr.lab_to_kh(&psi, 0.0).unwrap();
        assert_eq!(kh.frame(), Frame::Kh);
        assert!(kh.max_abs_diff(&psi) < 1e-15);
    }

    #[test]
    fn round_trip_and_mean_shift() {
        let (cache, g) = setup();
        let tr = FrameTransform::new(&cache, g).unwrap();
        let psi = WaveFunction::gaussian(g, Frame::Lab, -4.0, 3.0, 0.2);
        let t = 650.0;
        let kh = tr.lab_to_kh(&psi, t).unwrap();
        assert!((kh.norm_sqr() - 1.0).abs() < 1e-10);
        let alpha = cache.sample(t).alpha;
        assert!((mean_x(&kh) - (mean_x(&psi) - alpha)).abs() < 1e-6);
        let back = tr.kh_to_lab(&kh, t).unwrap();
        assert!(back.max_abs_diff(&psi) < 1e-9);
        assert!((mean_x(&back) - mean_x(&psi)).abs() < 1e-8);
    }

    #[test]
    fn frame_and_time_checks() {
        let (cache, g) = setup();
        let tr = FrameTransform::new(&cache, g).unwrap();
        let kh = WaveFunction::gaussian(g, Frame::Kh, 0.0, 2.0, 0.0);
        assert!(matches!(tr.lab_to_kh(&kh, 10.0), Err(Error::FrameMismatch { .. })));
        let lab = kh.clone().with_frame(Frame::Lab);
        assert!(matches!(tr.kh_to_lab(&lab, 10.0), Err(Error::FrameMismatch { .. })));
        assert!(matches!(tr.lab_to_kh(&lab, -1.0), Err(Error::TimeOutOfRange { .. })));
    }
}
