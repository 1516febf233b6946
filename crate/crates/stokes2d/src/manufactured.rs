//! Manufactured Stokes solution with closed-form data on the unit square.
//!
//! The velocity derives from a stream function, so its divergence vanishes
//! identically and the two Jacobian diagonal terms cancel exactly in
//! floating point. The force is differentiated by hand and cross-checked
//! against finite differences in the tests.

use crate::geometry::Vec2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// s(t) = t^2 (1-t)^2, the squared bump factor.
fn bump(t: f64) -> f64 {
    let w = t * (1.0 - t);
    w * w
}

/// q(t) = t (1-t)(1-2t) = s'(t) / 2.
fn swirl(t: f64) -> f64 {
    t * (1.0 - t) * (1.0 - 2.0 * t)
}

/// q'(t) = 1 - 6t + 6t^2.
fn swirl_d(t: f64) -> f64 {
    1.0 + 6.0 * t * (t - 1.0)
}

/// q''(t) = 12t - 6.
fn swirl_dd(t: f64) -> f64 {
    12.0 * t - 6.0
}

/// Closed-form vortex solution: u = 200 (s(x) q(y), -q(x) s(y)),
/// p = 10 ((x - 1/2)^3 y^2 + (1-x)^3 (y - 1/2)^3), f = -nu lap(u) + grad(p).
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedCase {
    pub nu: f64,
}

pub fn example51(nu: f64) -> ManufacturedCase {
    assert!(nu > 0.0 && nu.is_finite(), "viscosity must be positive");
    ManufacturedCase { nu }
}

impl ManufacturedCase {
    pub fn velocity(&self, x: Vec2) -> Vec2 {
        Vec2::new(
            200.0 * bump(x.x) * swirl(x.y),
            -200.0 * swirl(x.x) * bump(x.y),
        )
    }

    /// Jacobian with rows per component: grad[i][j] = d u_i / d x_j.
    pub fn velocity_gradient(&self, x: Vec2) -> [[f64; 2]; 2] {
        let cross = 400.0 * swirl(x.x) * swirl(x.y);
        [
            [cross, 200.0 * bump(x.x) * swirl_d(x.y)],
            [-200.0 * swirl_d(x.x) * bump(x.y), -cross],
        ]
    }

    pub fn divergence(&self, x: Vec2) -> f64 {
        let g = self.velocity_gradient(x);
        g[0][0] + g[1][1]
    }

    pub fn laplacian(&self, x: Vec2) -> Vec2 {
        Vec2::new(
            200.0 * (2.0 * swirl_d(x.x) * swirl(x.y) + bump(x.x) * swirl_dd(x.y)),
            -200.0 * (swirl_dd(x.x) * bump(x.y) + 2.0 * swirl(x.x) * swirl_d(x.y)),
        )
    }

    pub fn pressure(&self, x: Vec2) -> f64 {
        let a = x.x - 0.5;
        let b = 1.0 - x.x;
        let c = x.y - 0.5;
        10.0 * (a * a * a * x.y * x.y + b * b * b * c * c * c)
    }

    pub fn pressure_gradient(&self, x: Vec2) -> Vec2 {
        let a = x.x - 0.5;
        let b = 1.0 - x.x;
        let c = x.y - 0.5;
        Vec2::new(
            30.0 * (a * a * x.y * x.y - b * b * c * c * c),
            10.0 * (2.0 * a * a * a * x.y + 3.0 * b * b * b * c * c),
        )
    }

    pub fn force(&self, x: Vec2) -> Vec2 {
        self.pressure_gradient(x) - self.laplacian(x).scale(self.nu)
    }

    /// Compare the hand-differentiated force against centered finite
    /// differences at seeded random interior points. Returns the maximum
    /// deviation relative to the largest sampled force magnitude.
    pub fn verify_force(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-4;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for _ in 0..samples {
            let p = Vec2::new(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
            let east = Vec2::new(p.x + h, p.y);
            let west = Vec2::new(p.x - h, p.y);
            let north = Vec2::new(p.x, p.y + h);
            let south = Vec2::new(p.x, p.y - h);
            let center = self.velocity(p);
            let lap = (self.velocity(east) + self.velocity(west) + self.velocity(north)
                + self.velocity(south)
                - center.scale(4.0))
            .scale(1.0 / (h * h));
            let grad_p = Vec2::new(
                (self.pressure(east) - self.pressure(west)) / (2.0 * h),
                (self.pressure(north) - self.pressure(south)) / (2.0 * h),
            );
            let fd = grad_p - lap.scale(self.nu);
            let exact = self.force(p);
            worst = worst.max((fd - exact).norm());
            scale = scale.max(exact.norm());
        }
        worst / scale
    }
}

/// Gradient-perturbation potentials for the pressure-robustness experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Potential {
    /// psi(x, y) = x.
    X,
    /// psi(x, y) = (x - 1/2)^3 + (y - 1/2)^3, zero mean on the unit square.
    Cubic,
}

impl Potential {
    pub fn value(self, p: Vec2) -> f64 {
        match self {
            Potential::X => p.x,
            Potential::Cubic => {
                let a = p.x - 0.5;
                let b = p.y - 0.5;
                a * a * a + b * b * b
            }
        }
    }

    pub fn gradient(self, p: Vec2) -> Vec2 {
        match self {
            Potential::X => Vec2::new(1.0, 0.0),
            Potential::Cubic => {
                let a = p.x - 0.5;
                let b = p.y - 0.5;
                Vec2::new(3.0 * a * a, 3.0 * b * b)
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Potential::X => "x",
            Potential::Cubic => "cubic",
        }
    }
}
