//! Pipeline commands; each returns the files it wants written.

use crate::config::{RunConfig, ScanConfig};
use crate::output::{Artifact, Cell, Provenance, Table};
use crate::CliError;
use cassini_core::integrate::check_integrate;
use cassini_core::model::{assemble_hamiltonian, derive_params};
use cassini_core::pipeline::{self, PipelineError, Reduction, Run};
use cassini_core::pseries::io::to_text;
use cassini_core::stab::{parameter_scan, ScanSpec};
use cassini_core::{Exec, TruncationPolicy};
use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Model,
    Equilibrium,
    NormalForm,
    Stability,
    Scan,
    CheckIntegrate,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Model => "model",
            Command::Equilibrium => "equilibrium",
            Command::NormalForm => "normalform",
            Command::Stability => "stability",
            Command::Scan => "scan",
            Command::CheckIntegrate => "check-integrate",
            Command::All => "all",
        }
    }
}

/// One configuration with the expensive pipeline stages computed at most once.
pub struct Session {
    pub cfg: RunConfig,
    pub prov: Provenance,
    reduction: Option<Reduction>,
    run: Option<Run>,
}

impl Session {
    pub fn new(cfg: RunConfig, command: Command, config_bytes: &[u8]) -> Self {
        Self { cfg, prov: Provenance::new(command.name(), config_bytes), reduction: None, run: None }
    }

    fn reduction(&mut self) -> Result<&Reduction, CliError> {
        if self.reduction.is_none() {
            let red = pipeline::reduce(&self.cfg.params, &self.cfg.trunc, Exec::default())?;
            self.reduction = Some(red);
        }
        Ok(self.reduction.as_ref().expect("just set"))
    }

    fn run(&mut self) -> Result<&Run, CliError> {
        if self.run.is_none() {
            eprintln!("normal form to order {} (sqrtU degree {})", self.cfg.order, self.cfg.trunc.max_sqrtu_degree);
            let run = pipeline::run(&self.cfg.params, &self.cfg.settings())?;
            self.run = Some(run);
        }
        Ok(self.run.as_ref().expect("just set"))
    }

    pub fn execute(&mut self, command: Command) -> Result<Vec<Artifact>, CliError> {
        match command {
            Command::Model => self.model(),
            Command::Equilibrium => self.equilibrium(),
            Command::NormalForm => self.normal_form(),
            Command::Stability => self.stability(),
            Command::Scan => self.scan(),
            Command::CheckIntegrate => self.check_integrate(),
            Command::All => {
                let mut out = Vec::new();
                for c in [
                    Command::Model,
                    Command::Equilibrium,
                    Command::NormalForm,
                    Command::Stability,
                    Command::Scan,
                    Command::CheckIntegrate,
                ] {
                    out.extend(self.execute(c)?);
                }
                Ok(out)
            }
        }
    }

    fn model(&mut self) -> Result<Vec<Artifact>, CliError> {
        let cfg = &self.cfg;
        let h = assemble_hamiltonian(&cfg.params, &cfg.trunc).map_err(PipelineError::from)?;
        let d = derive_params(&cfg.params);
        let mut pot = Table::new(&["kind", "k1", "k3", "cos_K_power", "sin_K_power", "coeff"]);
        for (hm, poly) in &h.potential.harmonics {
            for ((a, b), c) in &poly.coeffs {
                pot.push(vec![hm.kind.to_string().into(), hm.k1.into(), hm.k3.into(), (*a).into(), (*b).into(), (*c).into()]);
            }
        }
        let summary = Table::key_value(vec![
            ("n_o", h.n_o.into()),
            ("Omega_dot", h.omega_dot.into()),
            ("n_o_star", d.n_o_star.into()),
            ("gamma1", d.gamma1.into()),
            ("gamma2", d.gamma2.into()),
            ("delta1", d.delta1.into()),
            ("delta2", d.delta2.into()),
            ("pericenter_residual", h.potential.pericenter_residual.into()),
        ]);
        let f = cfg.format;
        Ok(vec![
            Artifact::text("potential.txt", &h.potential.to_text(), &self.prov),
            Artifact::table("potential", &pot, f, &self.prov),
            Artifact::table("hamiltonian", &summary, f, &self.prov),
        ])
    }

    fn equilibrium(&mut self) -> Result<Vec<Artifact>, CliError> {
        let f = self.cfg.format;
        let red = self.reduction()?;
        let (eq, lin) = (red.equilibrium, red.linearization);
        let t = Table::key_value(vec![
            ("Sigma1_star_minus_1", (eq.sigma1_star - 1.0).into()),
            ("Sigma3_star", eq.sigma3_star.into()),
            ("K_star", eq.k_star.into()),
            ("gradient_residual", eq.gradient_residual.into()),
            ("newton_iterations", eq.iterations.into()),
            ("mu_Sigma1_Sigma1", lin.mu[0].into()),
            ("mu_Sigma1_Sigma3", lin.mu[1].into()),
            ("mu_Sigma3_Sigma3", lin.mu[2].into()),
            ("mu_sigma1_sigma1", lin.mu[3].into()),
            ("mu_sigma1_sigma3", lin.mu[4].into()),
            ("mu_sigma3_sigma3", lin.mu[5].into()),
            ("alpha", lin.alpha.into()),
            ("beta", lin.beta.into()),
            ("U1_star", lin.u_star[0].into()),
            ("U3_star", lin.u_star[1].into()),
            ("omega1", lin.omega[0].into()),
            ("omega3", lin.omega[1].into()),
        ]);
        let h0 = to_text(&red.h0);
        Ok(vec![Artifact::table("equilibrium", &t, f, &self.prov), Artifact::text("h0.txt", &h0, &self.prov)])
    }

    fn normal_form(&mut self) -> Result<Vec<Artifact>, CliError> {
        let f = self.cfg.format;
        let prov = self.prov.clone();
        let run = self.run()?;
        let (h0, nf) = (&run.reduction.h0, &run.normal_form);
        let mut counts = Table::new(&["degree", "h0_terms"]);
        for d in 2..=h0.trunc().max_sqrtu_degree {
            counts.push(vec![d.into(), h0.homogeneous_part(d).len().into()]);
        }
        let mut orders = Table::new(&[
            "order",
            "degree",
            "normal_form_terms",
            "generator_terms",
            "stage_remainder_terms",
            "homological_residual",
        ]);
        for s in 0..=nf.order {
            let (gen, res) = if s == 0 { (0, 0.0) } else { (nf.chi[s - 1].len(), nf.residuals[s - 1]) };
            orders.push(vec![
                s.into(),
                (s + 2).into(),
                nf.z[s].len().into(),
                gen.into(),
                nf.stage_remainders[s].len().into(),
                res.into(),
            ]);
        }
        let mut div = Table::new(&["degree", "k1", "k3", "divisor"]);
        for e in &nf.divisor_log.entries {
            div.push(vec![e.degree.into(), e.k[0].into(), e.k[1].into(), e.divisor.into()]);
        }
        let top = nf.order as u32 + 2;
        let z = nf.hamiltonian.filter(|k| k.degree() <= top);
        Ok(vec![
            Artifact::table("h0_terms", &counts, f, &prov),
            Artifact::table("normalform", &orders, f, &prov),
            Artifact::table("divisors", &div, f, &prov),
            Artifact::text("normal_form.txt", &to_text(&z), &prov),
        ])
    }

    fn stability(&mut self) -> Result<Vec<Artifact>, CliError> {
        let (f, rho0) = (self.cfg.format, self.cfg.rho0);
        let curve = self.cfg.curve.clone();
        let prov = self.prov.clone();
        let run = self.run()?;
        let mut cols = vec!["rho0".to_string(), "log10_T".into(), "r_opt".into()];
        cols.extend(curve.orders.iter().map(|m| format!("log10_T_r{m}")));
        let mut t = Table { columns: cols, rows: Vec::new() };
        for rho in curve.rho0_values() {
            let est = run.estimate(rho)?;
            let mut row: Vec<Cell> = vec![rho.into(), est.t.log10().into(), est.r_opt.into()];
            for &m in &curve.orders {
                row.push(run.estimate_up_to(rho, m)?.t.log10().into());
            }
            t.push(row);
        }
        let est = run.estimate(rho0)?;
        let mut table = Table::new(&["r", "rho_opt", "tau_tilde", "remainder_norm"]);
        for row in &est.per_order {
            table.push(vec![row.r.into(), row.rho_opt.into(), row.tau_tilde.into(), row.remainder_norm.into()]);
        }
        println!("T({rho0}) = {:.6e} years at r_opt = {}", est.t, est.r_opt);
        Ok(vec![Artifact::table("stability", &t, f, &prov), Artifact::table("stability_table", &table, f, &prov)])
    }

    fn scan(&mut self) -> Result<Vec<Artifact>, CliError> {
        let cfg = &self.cfg;
        let ScanConfig { x, y, .. } = cfg.scan;
        let spec = ScanSpec { x, y, base: cfg.params, settings: cfg.scan_settings()?, rho0: cfg.rho0 };
        eprintln!("scanning {}x{} grid at order {}", x.n, y.n, spec.settings.order);
        let res = parameter_scan(&spec, Exec::default())?;
        let name = format!("scan.{}", cfg.format.extension());
        let contents = match cfg.format {
            crate::config::Format::Csv => format!("{}\n{}", self.prov.line(), res.to_csv()),
            crate::config::Format::Gnuplot => format!("{}\n{}", self.prov.line(), res.to_gnuplot()),
            crate::config::Format::Json => {
                let doc = json!({ "provenance": self.prov.json(), "scan": res });
                serde_json::to_string_pretty(&doc).expect("scan serializes") + "\n"
            }
        };
        Ok(vec![Artifact { name, contents }])
    }

    fn check_integrate(&mut self) -> Result<Vec<Artifact>, CliError> {
        let (f, rho0, ig) = (self.cfg.format, self.cfg.rho0, self.cfg.integrate.clone());
        let (params, ecc) = (self.cfg.params, self.cfg.trunc.max_ecc_degree);
        let prov = self.prov.clone();
        let run = self.run()?;
        let est = run.estimate(rho0)?;
        let rho_opt = est.row(est.r_opt).expect("r_opt has a row").rho_opt;
        let weights = run.weights;
        let trunc = TruncationPolicy::new(ig.degree, ig.degree, ecc).map_err(PipelineError::from)?;
        let red = pipeline::reduce(&params, &trunc, Exec::default())?;
        eprintln!("integrating {} samples over {:e} years", ig.samples, ig.years);
        let rep = check_integrate(&red.h0, &weights, rho0, rho_opt, ig.years, ig.samples, ig.rtol, Exec::default())?;
        let mut t = Table::new(&[
            "sample",
            "U1_0",
            "U3_0",
            "u1_0",
            "u3_0",
            "max_ratio_1",
            "max_ratio_3",
            "energy_drift",
            "steps",
        ]);
        for s in &rep.samples {
            let mut row: Vec<Cell> = vec![s.index.into()];
            row.extend(s.initial.iter().map(|&v| Cell::from(v)));
            row.extend([s.max_ratio[0].into(), s.max_ratio[1].into(), s.energy_drift.into(), s.stats.accepted.into()]);
            t.push(row);
        }
        let contained = rep.max_ratio < 1.0;
        let summary = Table::key_value(vec![
            ("rho0", rep.rho0.into()),
            ("rho_opt", rep.rho_opt.into()),
            ("t_span_years", rep.t_span.into()),
            ("rtol", ig.rtol.into()),
            ("degree", ig.degree.into()),
            ("max_ratio", rep.max_ratio.into()),
            ("max_energy_drift", rep.max_energy_drift.into()),
            ("contained", if contained { "true" } else { "false" }.into()),
        ]);
        println!(
            "max U_j/(rho_opt R_j) = {:.6}, max energy drift = {:.3e}{}",
            rep.max_ratio,
            rep.max_energy_drift,
            if contained { "" } else { " (left the domain)" }
        );
        Ok(vec![
            Artifact::table("check_integrate", &t, f, &prov),
            Artifact::table("check_integrate_summary", &summary, f, &prov),
        ])
    }
}
