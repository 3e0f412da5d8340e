//! One function per command; each returns its tables and notes.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::*;
use super::output::Table;
use crate::classical_media::{
    chi1_two_level, chi2_mixing_spectrum, chi3_two_level, dispersion_omega, effective_chi_kerr, mode_norm_ak,
    two_level_polarization, two_level_polarization_series, DispersionCoeffs, ToneKind, TwoLevelParams, MU0,
};
use crate::closed_form::{
    downconv_kernel, downconv_kernel_oracle, envelope_decay_exponent, kerr_bs_optimum, kerr_mean_amplitude,
    kerr_mean_amplitude_gaussian, max_squeezing, max_squeezing_numeric, para_variances, phase_averaged_var_x2,
    corrected_var_x2,
};
use crate::diagnostics::{duan_simon_sum, epr_product};
use crate::error::{Error, Result};
use crate::evolve::{evolve_pure_with, EvolveOptions, SteadyOptions};
use crate::fock::{annihilation, coherent_state, make_space, number_operator};
use crate::linalg::C64;
use crate::models::{h_kerr_single, h_nphoton};
use crate::oscillator::{
    below_threshold_moments, lindblad_moments, squeezing_threshold_limit, stability_eigenvalues, steady_branches,
    Branch, DpoParams,
};
use crate::soliton::{classical_soliton, diffusion_parameter, mean_field, split_step_nlse, FiberParams, SpatialGrid};
use crate::validation::{duan_simon_minimum, kerr_bs_pipeline, pair_superposition, squeezed_vacuum_series};

pub struct Output {
    pub module: &'static str,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub fn squeeze(c: &SqueezeConfig) -> Result<Output> {
    let mut optimum = Table::new(
        "optimum",
        &[("np", "photons"), ("u_star", "1"), ("var_min", "1"), ("u_star_numeric", "1"), ("var_min_numeric", "1")],
    );
    let rows: Vec<[f64; 5]> = c
        .np
        .par_iter()
        .map(|&np| {
            let a = max_squeezing(np)?;
            let n = max_squeezing_numeric(np)?;
            Ok([np, a.u_star, a.var_min, n.u_star, n.var_min])
        })
        .collect::<Result<_>>()?;
    rows.iter().for_each(|r| optimum.push(r));

    let mut variance = Table::new(
        "variance",
        &[
            ("np", "photons"),
            ("u", "1"),
            ("var_x1", "1"),
            ("var_x2", "1"),
            ("var_x2_phase_averaged", "1"),
            ("var_x2_corrected", "1"),
        ],
    );
    for &np in &c.np {
        for u in linspace(0.0, c.u_max, c.u_points) {
            let (v1, v2) = para_variances(u, c.phi_p);
            variance.push(&[np, u, v1, v2, phase_averaged_var_x2(u, np)?, corrected_var_x2(u, np)?]);
        }
    }
    let mut tables = vec![optimum, variance];
    let mut notes = Vec::new();
    if c.simulate {
        if c.phi_p != 0.0 {
            notes.push("simulation uses pump phase 0; phi_p applies to the closed-form tables only".into());
        }
        let us = linspace(0.0, c.simulate_u_max, c.simulate_points);
        let sim = squeezed_vacuum_series(c.simulate_np, c.dims, &us)?;
        let mut t = Table::new(
            "simulation",
            &[("u", "1"), ("var_x1", "1"), ("var_x2", "1"), ("var_x1_closed", "1"), ("var_x2_closed", "1")],
        );
        for (&u, &(v1, v2)) in us.iter().zip(&sim) {
            let (p1, p2) = para_variances(u, 0.0);
            t.push(&[u, v1, v2, p1, p2]);
        }
        tables.push(t);
    }
    Ok(Output { module: "closed_form", tables, notes })
}

pub fn entangle(c: &EntangleConfig) -> Result<Output> {
    let mut scan = Table::new(
        "scan",
        &[("theta", "rad"), ("c0", "1"), ("c1", "1"), ("duan_simon_sum", "1"), ("epr_product", "1")],
    );
    let rows: Vec<[f64; 5]> = linspace(0.0, PI / 2.0, c.points)
        .into_par_iter()
        .map(|th| {
            let st = pair_superposition(th)?;
            Ok([th, th.cos(), -th.sin(), duan_simon_sum(&st, 0, 1)?.value, epr_product(&st, 0, 1)?.value])
        })
        .collect::<Result<_>>()?;
    rows.iter().for_each(|r| scan.push(r));
    let m = duan_simon_minimum()?;
    let mut min = Table::new(
        "minimum",
        &[("theta", "rad"), ("c0", "1"), ("value", "1"), ("c0_expected", "1"), ("value_expected", "1")],
    );
    min.push(&[m.theta, m.c0, m.value, (PI / 8.0).cos(), 4.0 - 2.0 * 2f64.sqrt()]);
    Ok(Output { module: "diagnostics", tables: vec![scan, min], notes: vec![] })
}

pub fn kerr(c: &KerrConfig) -> Result<Output> {
    let alpha = C64::from_polar(c.alpha, c.alpha_phase);
    let space = make_space(&[c.dim])?;
    let model = h_kerr_single(&space, c.omega, c.kappa)?;
    let times = linspace(0.0, c.t_max, c.samples);
    let opts = EvolveOptions { keep_states: false, ..EvolveOptions::default() }.observe("a", annihilation(&space, 0)?);
    let ev = evolve_pure_with(&model, &coherent_state(&space, &[alpha])?, &times, &opts)?;
    let a = ev.observable("a").ok_or_else(|| Error::Numeric("missing observable".into()))?;
    let mut mean = Table::new(
        "mean",
        &[
            ("t", "1/kappa"),
            ("re_closed", "1"),
            ("im_closed", "1"),
            ("re_numeric", "1"),
            ("im_numeric", "1"),
            ("abs_error", "1"),
            ("re_gaussian", "1"),
            ("im_gaussian", "1"),
        ],
    );
    for (&t, &v) in times.iter().zip(a) {
        let e = kerr_mean_amplitude(alpha, c.omega, c.kappa, t);
        let g = kerr_mean_amplitude_gaussian(alpha, c.omega, c.kappa, t);
        mean.push(&[t, e.re, e.im, v.re, v.im, (v - e).norm(), g.re, g.im]);
    }

    let opt = kerr_bs_optimum(c.bs_alpha, c.bs_phi);
    let simulated = if c.bs_simulate {
        kerr_bs_pipeline(c.bs_alpha, c.bs_phi, c.bs_beta, c.bs_dims)?.0
    } else {
        f64::NAN
    };
    let mut bs = Table::new(
        "beam_splitter",
        &[
            ("alpha", "1"),
            ("phi", "rad"),
            ("mean_n", "photons"),
            ("excess_closed", "photons"),
            ("excess_minimized", "photons"),
            ("r_opt", "1"),
            ("eta_opt", "rad"),
            ("excess_simulated", "photons"),
        ],
    );
    bs.push(&[c.bs_alpha, c.bs_phi, opt.mean_n, opt.excess, opt.excess_minimized, opt.r_opt, opt.eta_opt, simulated]);
    Ok(Output { module: "closed_form", tables: vec![mean, bs], notes: opt.warning.into_iter().collect() })
}

pub fn oscillator(c: &OscillatorConfig) -> Result<Output> {
    let threshold_e0 = c.gamma_a * c.gamma_b / c.kappa;
    let ratios = linspace(c.ratio_min, c.ratio_max, c.points);
    let rows: Vec<Vec<[f64; 13]>> = ratios
        .par_iter()
        .map(|&ratio| {
            let p = DpoParams::new(c.kappa, ratio * threshold_e0, c.gamma_a, c.gamma_b)?;
            let below = ratio < 1.0;
            let (number, squeezing) = if below {
                let m = below_threshold_moments(&p)?;
                (m.number, m.var_x2())
            } else if ratio == 1.0 {
                (f64::NAN, squeezing_threshold_limit(c.gamma_a, c.gamma_b)?)
            } else {
                (f64::NAN, f64::NAN)
            };
            let (ln, lv) = if c.lindblad && below {
                let l = lindblad_moments(&p, c.dims, &SteadyOptions::default())?;
                (l.moments.number, l.var_x2)
            } else {
                (f64::NAN, f64::NAN)
            };
            steady_branches(&p)?
                .iter()
                .map(|b| {
                    let st = stability_eigenvalues(&p, b)?;
                    let max_re = st.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
                    let code = match b.branch {
                        Branch::Below => 0.0,
                        Branch::AbovePlus => 1.0,
                        Branch::AboveMinus => 2.0,
                    };
                    let below_row = b.branch == Branch::Below;
                    Ok([
                        ratio,
                        p.e0,
                        code,
                        b.alpha0.re,
                        b.alpha0.im,
                        b.beta0.re,
                        b.beta0.im,
                        max_re,
                        if st.stable { 1.0 } else { 0.0 },
                        if below_row { number } else { f64::NAN },
                        if below_row { squeezing } else { f64::NAN },
                        if below_row { ln } else { f64::NAN },
                        if below_row { lv } else { f64::NAN },
                    ])
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        "sweep",
        &[
            ("threshold_ratio", "1"),
            ("e0", "1"),
            ("branch", "0=below,1=plus,2=minus"),
            ("alpha_re", "1"),
            ("alpha_im", "1"),
            ("beta_re", "1"),
            ("beta_im", "1"),
            ("max_re_eigenvalue", "gamma"),
            ("stable", "bool"),
            ("signal_number", "photons"),
            ("squeezing", "1"),
            ("lindblad_number", "photons"),
            ("lindblad_var_x2", "1"),
        ],
    );
    rows.iter().flatten().for_each(|r| t.push(r));
    let mut notes = Vec::new();
    if ratios.iter().any(|&r| r >= 1.0) {
        notes.push("squeezing at threshold_ratio = 1 is the closed-form limit; above threshold it is not defined".into());
    }
    Ok(Output { module: "oscillator", tables: vec![t], notes })
}

pub fn nphoton(c: &NphotonConfig) -> Result<Output> {
    let space = make_space(&c.dims)?;
    let model = h_nphoton(&space, c.omega, c.kappa, c.n)?;
    let na = number_operator(&space, 0)?;
    let mut opts = EvolveOptions { keep_states: false, ..EvolveOptions::default() }
        .observe("na", na.clone())
        .observe("na2", na.pow(2)?)
        .observe("nb", number_operator(&space, 1)?);
    let charge = model.charges.first().map(|q| (q.name.clone(), q.op.clone()));
    if let Some((_, op)) = &charge {
        opts = opts.observe("charge", op.clone());
    }
    let psi0 = coherent_state(&space, &[C64::new(0.0, 0.0), C64::new(c.pump_alpha, 0.0)])?;
    let times = linspace(0.0, c.t_max, c.samples);
    let ev = evolve_pure_with(&model, &psi0, &times, &opts)?;
    let get = |k: &str| ev.observable(k).map(|v| v.iter().map(|x| x.re).collect::<Vec<_>>());
    let (na, na2, nb) = (get("na").unwrap_or_default(), get("na2").unwrap_or_default(), get("nb").unwrap_or_default());
    let q = get("charge").unwrap_or_else(|| vec![f64::NAN; times.len()]);
    let mut t = Table::new(
        "evolution",
        &[("t", "1"), ("signal_number", "photons"), ("pump_number", "photons"), ("charge", "photons"), ("signal_excess", "photons")],
    );
    for i in 0..times.len() {
        t.push(&[times[i], na[i], nb[i], q[i], na2[i] - na[i] * na[i] - na[i]]);
    }
    let notes = charge.map(|(n, _)| format!("charge column is {n}")).into_iter().collect();
    Ok(Output { module: "models", tables: vec![t], notes })
}

pub fn medium(c: &MediumConfig) -> Result<Output> {
    let ratio = (c.e_max / c.e_min).ln();
    let fields: Vec<f64> = (0..c.points).map(|i| c.e_min * (ratio * i as f64 / (c.points - 1) as f64).exp()).collect();
    let base = TwoLevelParams { delta: c.delta, g_e: 0.0, n_density: c.n_density, g: c.g };
    let chi1 = chi1_two_level(&base)?;
    let chi3 = chi3_two_level(&base)?;
    let mut t = Table::new(
        "two_level",
        &[
            ("e0", "V/m"),
            ("polarization", "C/m^2"),
            ("polarization_series", "C/m^2"),
            ("chi1", "1"),
            ("chi3", "m^2/V^2"),
            ("chi_eff", "1"),
        ],
    );
    for &e in &fields {
        let p = TwoLevelParams { g_e: c.g * e, ..base };
        t.push(&[e, two_level_polarization(&p)?, two_level_polarization_series(&p)?, chi1, chi3, effective_chi_kerr(chi1, chi3, e)]);
    }
    let mut tables = vec![t];
    if !c.tones.is_empty() {
        let inputs: Vec<(f64, f64)> = c.tones.iter().map(|v| (v[0], v[1])).collect();
        let mut m = Table::new(
            "mixing",
            &[
                ("frequency", "rad/s"),
                ("amplitude", "C/m^2"),
                ("kind", "0=dc,1=second_harmonic,2=sum,3=difference"),
                ("source_i", "index"),
                ("source_j", "index"),
            ],
        );
        for tone in chi2_mixing_spectrum(&inputs, c.chi2) {
            let kind = match tone.kind {
                ToneKind::Dc => 0.0,
                ToneKind::SecondHarmonic => 1.0,
                ToneKind::Sum => 2.0,
                ToneKind::Difference => 3.0,
            };
            m.push(&[tone.frequency, tone.amplitude, kind, tone.sources.0 as f64, tone.sources.1 as f64]);
        }
        tables.push(m);
    }
    Ok(Output { module: "classical_media", tables, notes: vec![] })
}

pub fn dispersion(c: &DispersionConfig) -> Result<Output> {
    let coeffs = DispersionCoeffs {
        beta_nu: c.beta_nu,
        beta_nu_prime: c.beta_nu_prime,
        beta_nu_dblprime: c.beta_nu_dblprime,
        mu0: MU0,
    };
    let rows: Vec<[f64; 7]> = linspace(c.k_min, c.k_max, c.points)
        .into_par_iter()
        .map(|k| {
            let (wp, wm) = dispersion_omega(k, &coeffs)?;
            let n = mode_norm_ak(k, &coeffs)?;
            let h = 1e-6 * k;
            let fd = (dispersion_omega(k + h, &coeffs)?.0 - dispersion_omega(k - h, &coeffs)?.0) / (2.0 * h);
            Ok([k, wp, wm, n.a_k, n.a_k_group, n.v_k, fd])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        "modes",
        &[
            ("k", "1/m"),
            ("omega_plus", "rad/s"),
            ("omega_minus", "rad/s"),
            ("a_k", "SI"),
            ("a_k_group", "SI"),
            ("v_k", "m/s"),
            ("v_k_fd", "m/s"),
        ],
    );
    rows.iter().for_each(|r| t.push(r));
    Ok(Output { module: "classical_media", tables: vec![t], notes: vec![] })
}

pub fn downconv(c: &DownconvConfig) -> Result<Output> {
    let zs = linspace(c.dz_min, c.dz_max, c.points);
    let vals: Vec<C64> = zs.par_iter().map(|&z| downconv_kernel(z, c.k0).map(|p| p.value)).collect::<Result<_>>()?;
    let oracle = if c.oracle {
        Some(downconv_kernel_oracle(&zs, c.k0, c.oracle_sigma, c.oracle_n_perp, c.oracle_n_z)?)
    } else {
        None
    };
    let mut t = Table::new(
        "kernel",
        &[("delta_z", "length"), ("re", "1"), ("im", "1"), ("abs", "1"), ("oracle_abs", "arb")],
    );
    for (i, (&z, v)) in zs.iter().zip(&vals).enumerate() {
        let o = oracle.as_ref().map_or(f64::NAN, |o| o[i].norm());
        t.push(&[z, v.re, v.im, v.norm(), o]);
    }
    let exponent = envelope_decay_exponent(c.k0, c.fit_z_min, c.fit_z_max, c.fit_samples)?;
    let mut fit = Table::new(
        "fit",
        &[("k0", "1/length"), ("decay_exponent", "1"), ("zero_limit", "1"), ("zero_limit_expected", "1")],
    );
    fit.push(&[c.k0, exponent, downconv_kernel(0.0, c.k0)?.value.re, c.k0.powi(3) / 6.0]);
    let notes = if c.oracle { vec!["oracle_abs is the grid integration in arbitrary units".into()] } else { vec![] };
    Ok(Output { module: "closed_form", tables: vec![t, fit], notes })
}

pub fn soliton(c: &SolitonConfig) -> Result<Output> {
    let n0 = c.photon_number()?;
    let mut p = FiberParams::with_default_grid(c.omega1_dblprime, c.g3, n0)?;
    if let Some(g) = c.grid {
        p.grid = SpatialGrid::new(g.extent, g.points)?;
    }
    let t_final = c.t_final.unwrap_or_else(|| p.soliton_period(n0));
    let psi0 = classical_soliton(n0, 0.0, 0.0, &p, 0.0)?;
    let snap_times = linspace(0.0, t_final, c.snapshots + 1);
    let x = p.grid.x();
    let mut profile = Table::new("profile", &[("t", "1"), ("x", "length"), ("abs_psi", "1")]);
    let mut peak = Table::new("peak", &[("t", "1"), ("peak", "1"), ("norm", "photons")]);
    let mut psi = psi0.clone();
    let steps_per = (c.steps as f64 / c.snapshots as f64).ceil() as usize;
    for (i, &t) in snap_times.iter().enumerate() {
        if i > 0 {
            psi = split_step_nlse(&psi, &p, t - snap_times[i - 1], steps_per)?;
        }
        for (xi, v) in x.iter().zip(&psi.values) {
            profile.push(&[t, *xi, v.norm()]);
        }
        peak.push(&[t, psi.peak(), psi.norm_sqr()]);
    }
    let mut tables = vec![profile, peak];
    if c.mean_field {
        let alpha = C64::new(c.alpha.unwrap_or((n0 as f64).sqrt()), 0.0);
        let td = 1.0 / diffusion_parameter(c.g3, 1.0, n0 as f64);
        let rows: Vec<[f64; 4]> = linspace(0.0, 3.0 * td, c.mean_field_samples)
            .into_par_iter()
            .map(|t| {
                let m = mean_field(alpha, &p, t)?;
                Ok([t, m.profile.peak(), m.diffusion_parameter, m.tail_bound])
            })
            .collect::<Result<_>>()?;
        let mut t = Table::new(
            "mean_field",
            &[("t", "1"), ("peak", "1"), ("diffusion_parameter", "1"), ("tail_bound", "1")],
        );
        rows.iter().for_each(|r| t.push(r));
        tables.push(t);
    }
    Ok(Output {
        module: "soliton",
        tables,
        notes: vec![format!("n0 = {n0}, soliton period {:e}", p.soliton_period(n0))],
    })
}
