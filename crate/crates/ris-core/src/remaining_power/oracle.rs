//! Quadrature oracle for the expected pixel coefficient μ(φ) = E{β(φ+Δ̄)e^{−jΔ}}.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{squared_modulus, Method, ReflectionCase, RpResult};
use crate::circular_noise::{NoiseFamily, NoiseSpec};
use crate::error::Result;
use crate::pda::PdaParams;
use crate::quadrature::{integrate, Integral, QuadOptions};

/// Default oracle tolerances; well below the 1e-8 accuracy target.
pub(crate) fn oracle_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// exp(κ(cos x − 1)), with cos x − 1 = −2 sin²(x/2) to keep precision for sharp peaks.
fn vm_kernel(kappa: f64, x: f64) -> f64 {
    let s = (0.5 * x).sin();
    (-2.0 * kappa * s * s).exp()
}

/// Expectation operator over one error variable of a given family.
struct Expect {
    family: NoiseFamily,
    opts: QuadOptions,
    vm_norm: f64,
}

impl Expect {
    fn new(family: NoiseFamily, opts: QuadOptions) -> Result<Self> {
        family.validate()?;
        let vm_norm = match family.kappa() {
            Some(k) if k > 0.0 => integrate(|x| vm_kernel(k, x), -PI, PI, opts)?.value,
            _ => 2.0 * PI,
        };
        Ok(Self {
            family,
            opts,
            vm_norm,
        })
    }

    fn tighter(&self) -> QuadOptions {
        QuadOptions {
            abs_tol: self.opts.abs_tol * 1e-2,
            rel_tol: self.opts.rel_tol * 1e-2,
            ..self.opts
        }
    }

    fn uniform(
        &self,
        tau: f64,
        g: &mut dyn FnMut(f64) -> f64,
        opts: QuadOptions,
    ) -> Result<Integral> {
        if tau == 0.0 {
            return Ok(Integral {
                value: g(0.0),
                abs_error: 0.0,
                evaluations: 1,
            });
        }
        let w = 0.5 / tau;
        integrate(|x| g(x) * w, -tau, tau, opts)
    }

    fn von_mises(
        &self,
        kappa: f64,
        g: &mut dyn FnMut(f64) -> f64,
        opts: QuadOptions,
    ) -> Result<Integral> {
        let norm = self.vm_norm;
        let opts = QuadOptions {
            abs_tol: opts.abs_tol * norm,
            ..opts
        };
        let r = integrate(|x| g(x) * vm_kernel(kappa, x), -PI, PI, opts)?;
        Ok(Integral {
            value: r.value / norm,
            abs_error: r.abs_error / norm,
            evaluations: r.evaluations,
        })
    }

    /// E[g(Δ)].
    fn eval(&self, g: &mut dyn FnMut(f64) -> f64) -> Result<Integral> {
        match self.family {
            NoiseFamily::Uniform { tau } => self.uniform(tau, g, self.opts),
            NoiseFamily::VonMises { kappa } => self.von_mises(kappa, g, self.opts),
            NoiseFamily::Composite { tau, kappa } => {
                // Δ = δ + γ: inner von Mises expectation nested in the uniform one.
                let inner_opts = self.tighter();
                let mut failure = None;
                let mut evals = 0;
                let mut inner_err = 0.0_f64;
                let outer = self.uniform(
                    tau,
                    &mut |d| match self.von_mises(kappa, &mut |v| g(d + v), inner_opts) {
                        Ok(r) => {
                            evals += r.evaluations;
                            inner_err = inner_err.max(r.abs_error);
                            r.value
                        }
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    self.opts,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                let outer = outer?;
                Ok(Integral {
                    value: outer.value,
                    abs_error: outer.abs_error + inner_err,
                    evaluations: evals,
                })
            }
        }
    }

    /// E[g(Δ)] for complex-valued g, split into real and imaginary parts.
    fn eval_complex(&self, g: &mut dyn FnMut(f64) -> Complex64) -> Result<(Complex64, f64, usize)> {
        let re = self.eval(&mut |x| g(x).re)?;
        let im = self.eval(&mut |x| g(x).im)?;
        Ok((
            Complex64::new(re.value, im.value),
            re.abs_error.hypot(im.abs_error),
            re.evaluations + im.evaluations,
        ))
    }
}

/// μ(φ) with an absolute error bound and the number of integrand evaluations.
pub fn expected_coefficient(
    case: &ReflectionCase,
    pda: &PdaParams,
    noise: &NoiseSpec,
    phi: f64,
    opts: QuadOptions,
) -> Result<(Complex64, f64, usize)> {
    case.check(noise)?;
    pda.validate()?;
    let ex = Expect::new(noise.family, opts)?;
    let rot = |x: f64| Complex64::from_polar(1.0, -x);
    match case {
        ReflectionCase::CaseI { .. } | ReflectionCase::CaseII => {
            let amp = case.amplitude(pda, phi, 0.0);
            let (m, e, n) = ex.eval_complex(&mut |x| rot(x))?;
            Ok((m * amp, e * amp, n))
        }
        ReflectionCase::CaseIII | ReflectionCase::CaseIV => {
            let iota = noise.iota;
            if iota == 1.0 {
                ex.eval_complex(&mut |x| rot(x) * pda.beta(phi + x))
            } else if iota == 0.0 {
                let amp = ex.eval(&mut |x| pda.beta(phi + x))?;
                let (m, e, n) = ex.eval_complex(&mut |x| rot(x))?;
                Ok((
                    m * amp.value,
                    e * amp.value + m.norm() * amp.abs_error,
                    n + amp.evaluations,
                ))
            } else if pda.a == 1.0 {
                sinusoid_partial(&ex, pda, iota, phi)
            } else {
                nested_partial(&ex, pda, iota, phi)
            }
        }
    }
}

/// E[cos(tΔ)]; the error distributions are symmetric, so this is the full
/// characteristic function.
fn char_fn(ex: &Expect, t: f64) -> Result<Integral> {
    let uniform = |tau: f64| {
        if tau == 0.0 || t == 0.0 {
            1.0
        } else {
            (t * tau).sin() / (t * tau)
        }
    };
    match ex.family {
        NoiseFamily::Uniform { tau } => Ok(Integral {
            value: uniform(tau),
            abs_error: 0.0,
            evaluations: 1,
        }),
        NoiseFamily::VonMises { kappa } => ex.von_mises(kappa, &mut |x| (t * x).cos(), ex.opts),
        NoiseFamily::Composite { tau, kappa } => {
            let r = ex.von_mises(kappa, &mut |x| (t * x).cos(), ex.opts)?;
            let u = uniform(tau);
            Ok(Integral {
                value: u * r.value,
                abs_error: u.abs() * r.abs_error,
                evaluations: r.evaluations,
            })
        }
    }
}

/// Partial coupling with a = 1, where β(x) = (1+b)/2 + (1−b)/2·sin(x − c).
///
/// With Δ̄ = ιΔ + wΔ̆ and χ(t) = E cos(tΔ):
/// E[sin(ψ + Δ̄)e^{−jΔ}] = χ(w)/(2j)·(e^{jψ}χ(1−ι) − e^{−jψ}χ(1+ι)).
fn sinusoid_partial(
    ex: &Expect,
    pda: &PdaParams,
    iota: f64,
    phi: f64,
) -> Result<(Complex64, f64, usize)> {
    let w = (1.0 - iota * iota).sqrt();
    let [c1, cw, cm, cp] = [1.0, w, 1.0 - iota, 1.0 + iota].map(|t| char_fn(ex, t));
    let (c1, cw, cm, cp) = (c1?, cw?, cm?, cp?);
    let psi = phi - pda.c;
    let rot = Complex64::from_polar(1.0, psi);
    let bracket = rot * cm.value - rot.conj() * cp.value;
    let sin_term = bracket * cw.value / Complex64::new(0.0, 2.0);
    let (k0, k1) = ((1.0 + pda.b) / 2.0, (1.0 - pda.b) / 2.0);
    let mu = k0 * c1.value + k1 * sin_term;
    let err = k0 * c1.abs_error
        + k1 * 0.5
            * (cw.abs_error * (cm.value.abs() + cp.value.abs()) + cm.abs_error + cp.abs_error);
    let evals = c1.evaluations + cw.evaluations + cm.evaluations + cp.evaluations;
    Ok((mu, err, evals))
}

/// Tolerance floor for the nested partial-coupling integral.
const NESTED_TOL: f64 = 1e-10;

/// General partial coupling: the amplitude expectation over Δ̆ nested inside
/// the expectation over Δ.
fn nested_partial(
    ex: &Expect,
    pda: &PdaParams,
    iota: f64,
    phi: f64,
) -> Result<(Complex64, f64, usize)> {
    let opts = QuadOptions {
        abs_tol: ex.opts.abs_tol.max(NESTED_TOL),
        rel_tol: ex.opts.rel_tol.max(NESTED_TOL),
        ..ex.opts
    };
    let outer = Expect::new(ex.family, opts)?;
    let inner = Expect::new(ex.family, outer.tighter())?;
    let w = (1.0 - iota * iota).sqrt();
    // Real and imaginary passes hit the same nodes; cache the inner integral.
    let mut cache = std::collections::HashMap::new();
    let mut failure = None;
    let mut inner_err = 0.0_f64;
    let mut evals = 0;
    let mut amp_given = |x: f64| {
        if let Some(&v) = cache.get(&x.to_bits()) {
            return v;
        }
        let v = match inner.eval(&mut |y| pda.beta(phi + iota * x + w * y)) {
            Ok(r) => {
                inner_err = inner_err.max(r.abs_error);
                evals += r.evaluations;
                r.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        };
        cache.insert(x.to_bits(), v);
        v
    };
    let res = outer.eval_complex(&mut |x| Complex64::from_polar(1.0, -x) * amp_given(x));
    if let Some(e) = failure {
        return Err(e);
    }
    let (m, e, n) = res?;
    Ok((m, e + inner_err, n + evals))
}

/// Γ = |μ(φ)|² by adaptive quadrature at the default tolerances.
pub fn gamma_oracle(
    case: &ReflectionCase,
    pda: &PdaParams,
    noise: &NoiseSpec,
    phi: f64,
) -> Result<RpResult> {
    gamma_oracle_with(case, pda, noise, phi, oracle_options())
}

/// [`gamma_oracle`] with explicit quadrature tolerances.
pub fn gamma_oracle_with(
    case: &ReflectionCase,
    pda: &PdaParams,
    noise: &NoiseSpec,
    phi: f64,
    opts: QuadOptions,
) -> Result<RpResult> {
    let (mu, err, evaluations) = expected_coefficient(case, pda, noise, phi, opts)?;
    let (gamma, error_estimate) = squared_modulus(mu, err);
    Ok(RpResult {
        gamma,
        method: Method::NumericOracle { evaluations },
        error_estimate,
    })
}

/// Mean of μ(φ) over φ uniform on `[lo, hi]`, with an error bound.
pub fn phase_average_coefficient(
    case: &ReflectionCase,
    pda: &PdaParams,
    noise: &NoiseSpec,
    lo: f64,
    hi: f64,
) -> Result<(Complex64, f64)> {
    let inner = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_intervals: 2000,
    };
    let outer = QuadOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_intervals: 2000,
    };
    let mut failure = None;
    let mut inner_err = 0.0_f64;
    let mut part = |phi: f64, imag: bool| match expected_coefficient(case, pda, noise, phi, inner) {
        Ok((m, e, _)) => {
            inner_err = inner_err.max(e);
            if imag {
                m.im
            } else {
                m.re
            }
        }
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let re = integrate(|p| part(p, false), lo, hi, outer);
    let im = integrate(|p| part(p, true), lo, hi, outer);
    if let Some(e) = failure {
        return Err(e);
    }
    let (re, im) = (re?, im?);
    let len = hi - lo;
    Ok((
        Complex64::new(re.value, im.value) / len,
        re.abs_error.hypot(im.abs_error) / len.abs() + inner_err,
    ))
}
