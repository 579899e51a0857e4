//! Bundled example systems.

/// Four-mode wave amplitude equations on an annulus, restricted to real
/// amplitudes so the conjugations drop out. Generic parameters give 81
/// isolated solutions.
pub const MONKS_SYSTEM: &str = "\
variable z0, z1, z2, z3;
parameter mu0, mu1, gamma;
function f0, f1, f2, f3;
f0 = mu0*z0 + z1*z2 - gamma*z0*(2*(z0^2 + z1^2 + z2^2 + z3^2) - z0^2);
f1 = mu1*z1 + z0*z2 + z2*z3 - gamma*z1*(2*(z0^2 + z1^2 + z2^2 + z3^2) - z1^2);
f2 = mu1*z2 + z0*z1 + z1*z3 - gamma*z2*(2*(z0^2 + z1^2 + z2^2 + z3^2) - z2^2);
f3 = mu0*z3 + z1*z2 - gamma*z3*(2*(z0^2 + z1^2 + z2^2 + z3^2) - z3^2);
";

/// Sextic surface `x^6 + y^6 + z^6 = 1` solved for `z` over the `(x, y)` plane.
pub const CUBE_SYSTEM: &str = "\
variable z;
parameter x, y;
function f;
f = x^6 + y^6 + z^6 - 1;
";
