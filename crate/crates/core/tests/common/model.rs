//! Plain-f64 models of the builtin systems, written independently of the
//! interval implementations so sampled trajectories and images form a
//! second route for cross-checks.

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn cap_map(mu: f64, theta: f64, x: f64, y: f64) -> (f64, f64, f64) {
    (
        (3.0 * theta + x * y * theta.sin()).rem_euclid(TWO_PI),
        4.0 * x.powi(3) - 8.0 * x / 5.0 + x * y / 2.0,
        mu * y + 2.0 * theta.sin() / 5.0 + x * theta.cos(),
    )
}

pub fn cap_homotopy(mu: f64, alpha: f64, theta: f64, x: f64, y: f64) -> (f64, f64, f64) {
    let (_, fx, fy) = cap_map(mu, theta, x, y);
    (
        (3.0 * theta + (1.0 - alpha) * x * y * theta.sin()).rem_euclid(TWO_PI),
        alpha * 2.0 * x + (1.0 - alpha) * fx,
        (1.0 - alpha) * fy,
    )
}

pub fn toy_fbeta(mu: f64, beta: f64, winding: f64, theta: f64, x: f64, y: f64) -> (f64, f64, f64) {
    let f0 = (4.0 * x, mu * y);
    let f1 = (-3.0 * x + 5.0 * x.powi(3), theta.sin() / 2.0 + mu * y);
    (
        (winding * theta).rem_euclid(TWO_PI),
        (1.0 - beta) * f0.0 + beta * f1.0,
        (1.0 - beta) * f0.1 + beta * f1.1,
    )
}

pub fn toy_homotopy(
    mu: f64,
    beta: f64,
    winding: f64,
    alpha: f64,
    theta: f64,
    x: f64,
    y: f64,
) -> (f64, f64, f64) {
    let (ft, fx, fy) = toy_fbeta(mu, beta, winding, theta, x, y);
    (ft, (1.0 - alpha) * fx + alpha * 2.0 * x, (1.0 - alpha) * fy)
}

pub fn linear_nhim_homotopy(
    a: f64,
    b: f64,
    eta_coeff: f64,
    alpha: f64,
    theta: f64,
    x: f64,
    y: f64,
) -> (f64, f64, f64) {
    (
        (eta_coeff * theta).rem_euclid(TWO_PI),
        a * x,
        (1.0 - alpha) * b * y,
    )
}
