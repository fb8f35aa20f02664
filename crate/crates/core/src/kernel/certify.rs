use crate::kernel::trajectory::MapTrajectory;

/// CPT data of one trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptSample {
    pub t: f64,
    pub min_choi_eig: f64,
    pub trace_dev: f64,
    pub is_cpt: bool,
}

/// Per-sample certification of a map trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub tol: f64,
    pub samples: Vec<CptSample>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.samples.iter().all(|s| s.is_cpt)
    }

    pub fn first_violation(&self) -> Option<&CptSample> {
        self.samples.iter().find(|s| !s.is_cpt)
    }

    pub fn min_choi_eig(&self) -> f64 {
        self.samples.iter().map(|s| s.min_choi_eig).fold(f64::INFINITY, f64::min)
    }

    pub fn max_trace_dev(&self) -> f64 {
        self.samples.iter().map(|s| s.trace_dev).fold(0.0, f64::max)
    }
}

pub fn cpt_certify(traj: &MapTrajectory, tol: f64) -> CertificationReport {
    let samples = traj
        .grid()
        .times()
        .into_iter()
        .zip(traj.maps())
        .map(|(t, m)| {
            let r = m.cpt_check(tol);
            CptSample {
                t,
                min_choi_eig: r.min_choi_eig,
                trace_dev: r.trace_dev,
                is_cpt: r.is_cpt,
            }
        })
        .collect();
    CertificationReport { tol, samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Superoperator;
    use crate::kernel::grid::TimeGrid;

    #[test]
    fn identity_trajectory_passes() {
        let grid = TimeGrid::new(1.0, 5).unwrap();
        let report = cpt_certify(&MapTrajectory::identity(grid, 2), 1e-8);
        assert!(report.passed());
        assert!(report.min_choi_eig().abs() < 1e-12);
        assert!(report.first_violation().is_none());
    }

    #[test]
    fn first_violation_is_reported() {
        let grid = TimeGrid::new(1.0, 5).unwrap();
        let mut maps = vec![Superoperator::identity(2); 5];
        maps[3] = Superoperator::transpose_map(2);
        maps[4] = Superoperator::transpose_map(2);
        let report = cpt_certify(&MapTrajectory::new(grid, maps).unwrap(), 1e-8);
        assert!(!report.passed());
        assert_eq!(report.first_violation().unwrap().t, 0.75);
        assert!((report.min_choi_eig() + 1.0).abs() < 1e-12);
    }
}
