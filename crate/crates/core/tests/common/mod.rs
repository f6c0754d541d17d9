//! Checks of the library against the reference values in `tests/fixtures`,
//! shared by the `oracles` test target and the acceptance runner.

#![allow(dead_code)]

use std::path::PathBuf;

use diploid_ad::canonical::{rhs_general, rhs_phenotypic, rhs_symmetric, CanonicalOptions};
use diploid_ad::dynamics::{
    count_zeros_near_curve, integrate_flow, jacobian_spectrum_at_resident, logistic_solution, selection_gradient,
    DimorphicModel, FlowOptions, GenotypeDensities, NeutralGeometry,
};
use diploid_ad::ibm::{PopulationState, Simulator};
use diploid_ad::invasion::{
    extinction_fixed_point, integrate_extinction, survival_probability, BranchingSpec,
};
use diploid_ad::model::{
    gaussian_competition, DemographyModel, GaussianKernelParams, Genotype, ModelSpec, MutationKernel, PhenotypeMap,
    TraitSpace,
};
use diploid_ad::numerics::quad::{integrate_pieces, QuadOptions};
use diploid_ad::numerics::stats::{ks_critical_1pct, ks_statistic, Proportion};
use diploid_ad::rng::stream;
use diploid_ad::tss::{find_singular_strategies, jump_rate_density, m1_modulus, total_jump_rate, JumpSampler};
use serde_json::Value;

pub type Check = Result<(), String>;
pub type CheckFn = fn() -> Check;

pub fn fixture(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn arr<const N: usize>(v: &Value) -> [f64; N] {
    let a = v.as_array().unwrap();
    std::array::from_fn(|i| f(&a[i]))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(what: &str, got: f64, want: f64, tol: f64) -> Check {
    ensure((got - want).abs() <= tol, || format!("{what}: got {got:e}, want {want:e} (tol {tol:e})"))
}

fn close_rel(what: &str, got: f64, want: f64, rel: f64, abs: f64) -> Check {
    ensure((got - want).abs() <= rel * want.abs() + abs, || {
        format!("{what}: got {got:e}, want {want:e} (rel {rel:e})")
    })
}

/// Model described by a `describe()` record of the oracle script.
pub fn gaussian_model(d: &Value) -> DemographyModel {
    let [lo, hi] = arr::<2>(&d["space"]);
    DemographyModel::new(
        ModelSpec::gaussian(
            TraitSpace::new(lo, hi).unwrap(),
            f(&d["f"]),
            f(&d["d"]),
            f(&d["sigma_a"]),
            f(&d["sigma_k"]),
            f(&d["phi_0"]),
        )
        .with_sigma(f(&d["sigma"])),
    )
    .unwrap()
}

pub fn phenotype_additivity() -> Check {
    let fx = fixture("phenotype_additivity");
    let coeffs: Vec<f64> = fx["coeffs"].as_array().unwrap().iter().map(f).collect();
    let map = PhenotypeMap::Polynomial {
        coeffs,
        dominance: f(&fx["dominance"]),
    };
    let z = f(&fx["zeta"]);
    for c in fx["cases"].as_array().unwrap() {
        let u = f(&c["u"]);
        let defect = map.eval(u, u + z) - 0.5 * (map.eval(u, u) + map.eval(u + z, u + z));
        close(&format!("additivity defect at u = {u}"), defect, f(&c["defect"]), f(&fx["tolerance"]))?;
        ensure(defect.abs() < 10.0 * z * z, || format!("defect {defect} is not O(zeta^2)"))?;
    }
    Ok(())
}

pub fn gaussian_kernel() -> Check {
    let fx = fixture("gaussian_competition");
    let p = &fx["params"];
    let params = GaussianKernelParams::new(f(&p["r_bar"]), f(&p["sigma_a"]), f(&p["sigma_k"]), f(&p["phi_0"])).unwrap();
    for c in fx["cases"].as_array().unwrap() {
        let got = gaussian_competition(&params, f(&c["focal"]), f(&c["other"]));
        close_rel("gaussian competition", got, f(&c["value"]), f(&fx["relative_tolerance"]), 0.0)?;
    }
    Ok(())
}

pub fn mutation_moments() -> Check {
    let fx = fixture("mutation_moments");
    let (u, sigma) = (f(&fx["u"]), f(&fx["sigma"]));
    let model = DemographyModel::new(ModelSpec::logistic(2.0, 1.0, 1.0).with_sigma(sigma)).unwrap();
    let n = fx["draws"].as_u64().unwrap() as usize;
    let mut rng = stream(101, 0);
    let draws: Vec<f64> = (0..n).map(|_| model.sample_mutation_step(u, &mut rng).unwrap()).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let se = (f(&fx["variance"]) / n as f64).sqrt();
    let k = f(&fx["standard_errors"]);
    close("mutation step mean", mean, f(&fx["mean"]), k * se)?;
    // fourth central moment of the uniform step law is sigma^4 / 5
    let s2 = f(&fx["variance"]);
    let mu4 = sigma.powi(4) / 5.0;
    close("mutation step variance", var, s2, k * ((mu4 - s2 * s2) / n as f64).sqrt())
}

pub fn ibm_rates() -> Check {
    let fx = fixture("ibm_rates");
    let m = &fx["model"];
    let [lo, hi] = arr::<2>(&m["space"]);
    let model = DemographyModel::new(ModelSpec::gaussian(
        TraitSpace::new(lo, hi).unwrap(),
        f(&m["f"]),
        f(&m["d"]),
        f(&m["sigma_a"]),
        f(&m["sigma_k"]),
        f(&m["phi_0"]),
    ))
    .unwrap();
    let k = f(&fx["k"]);
    let state = fx["individuals"].as_array().unwrap().iter().fold(PopulationState::new(k), |s, g| {
        let [a, b] = arr::<2>(g);
        s.with(Genotype::new(a, b), 1)
    });
    let sim = Simulator::new(&model, &state).map_err(|e| e.to_string())?;
    let (birth, death) = sim.total_rates();
    let tol = f(&fx["tolerance"]);
    close_rel("total birth rate", birth, f(&fx["birth"]), tol, tol)?;
    close_rel("total death rate", death, f(&fx["death"]), tol, tol)?;
    for c in fx["per_capita_death"].as_array().unwrap() {
        let [a, b] = arr::<2>(&c["genotype"]);
        let got = sim.death_rate(&Genotype::new(a, b)).ok_or("genotype missing")?;
        close_rel("per-capita death", got, f(&c["rate"]), tol, tol)?;
    }
    Ok(())
}

pub fn mendelian() -> Check {
    let fx = fixture("mendelian");
    let model = DemographyModel::new(ModelSpec::logistic(2.0, 1.0, 1.0)).unwrap();
    let n = fx["trials"].as_u64().unwrap();
    let k = f(&fx["standard_errors"]);
    for (ci, c) in fx["cases"].as_array().unwrap().iter().enumerate() {
        let [m1, m2] = arr::<2>(&c["mother"]);
        let [f1, f2] = arr::<2>(&c["father"]);
        let (mother, father) = (Genotype::new(m1, m2), Genotype::new(f1, f2));
        let mut rng = stream(202, ci as u64);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            let (child, _) = Simulator::offspring(&model, &mother, &father, 0.0, &mut rng).unwrap();
            *counts.entry(child).or_insert(0u64) += 1;
        }
        let mut covered = 0;
        for entry in c["law"].as_array().unwrap() {
            let [a, b] = arr::<2>(&entry["genotype"]);
            let g = Genotype::new(a, b);
            let got = counts.get(&g).copied().unwrap_or(0);
            covered += got;
            let p = f(&entry["probability"]);
            ensure(Proportion::new(got, n).consistent_with(p, k), || {
                format!("offspring {g:?} of {mother:?} x {father:?}: {got}/{n} vs {p}")
            })?;
        }
        ensure(covered == n, || "offspring outside the Mendelian support".into())?;
    }
    Ok(())
}

pub fn logistic() -> Check {
    let fx = fixture("logistic");
    let (fe, d, c, n0) = (f(&fx["f"]), f(&fx["d"]), f(&fx["c"]), f(&fx["n0"]));
    let times = fx["times"].as_array().unwrap();
    let values = fx["values"].as_array().unwrap();
    for (t, v) in times.iter().zip(values) {
        close("logistic closed form", logistic_solution(n0, fe, d, c, f(t)), f(v), f(&fx["tolerance"]))?;
    }
    // the same curve from the integrator, as the AA-only face of the two-allele field
    let dm = DimorphicModel::from_constants([fe; 3], [d; 3], [[c; 3]; 3]);
    let path = integrate_flow(GenotypeDensities::new(n0, 0.0, 0.0), &dm, 20.0, &FlowOptions::default()).map_err(|e| e.to_string())?;
    close("logistic integrated n(20)", path.last().1[0], f(values.last().unwrap()), f(&fx["ode_tolerance"]))
}

pub fn dimorphic_rhs() -> Check {
    let fx = fixture("dimorphic_rhs");
    let tol = f(&fx["tolerance"]);
    for c in fx["cases"].as_array().unwrap() {
        let comp = c["competition"].as_array().unwrap();
        let dm = DimorphicModel::from_constants(
            arr::<3>(&c["fertility"]),
            arr::<3>(&c["death"]),
            [arr::<3>(&comp[0]), arr::<3>(&comp[1]), arr::<3>(&comp[2])],
        );
        let got = dm.rhs(&arr::<3>(&c["state"]));
        let want = arr::<3>(&c["rhs"]);
        for i in 0..3 {
            close_rel("dimorphic field", got[i], want[i], tol, tol)?;
        }
    }
    Ok(())
}

pub fn third_eigenvalue() -> Check {
    let fx = fixture("third_eigenvalue");
    let model = gaussian_model(&fx["model"]);
    let tol = f(&fx["tolerance"]);
    for c in fx["cases"].as_array().unwrap() {
        let dm = DimorphicModel::new(&model, f(&c["u_resident"]), f(&c["u_mutant"])).map_err(|e| e.to_string())?;
        let s = dm.fitness_in_resident();
        close("invasion fitness", s, f(&c["invasion_fitness"]), 1e-12)?;
        let oracle = arr::<3>(&c["eigenvalues"]);
        let nearest = oracle.iter().map(|e| (e - s).abs()).fold(f64::INFINITY, f64::min);
        ensure(nearest <= tol, || format!("no Jacobian eigenvalue within {tol} of S = {s}: {oracle:?}"))?;
        let ours = jacobian_spectrum_at_resident(&dm);
        for (a, b) in ours.iter().zip(oracle) {
            close("Jacobian spectrum", *a, b, 1e-6)?;
        }
    }
    Ok(())
}

pub fn neutral_flow() -> Check {
    let fx = fixture("neutral_flow");
    let dm = DimorphicModel::from_constants([f(&fx["f"]); 3], [f(&fx["d"]); 3], [[f(&fx["c"]); 3]; 3]);
    let tol = f(&fx["tolerance"]);
    for c in fx["cases"].as_array().unwrap() {
        let start = GenotypeDensities::from(arr::<3>(&c["start"]));
        let path = integrate_flow(start, &dm, 10.0, &FlowOptions::recorded(1.0)).map_err(|e| e.to_string())?;
        for row in c["rows"].as_array().unwrap() {
            let t = f(&row["t"]);
            let i = (t.round()) as usize;
            let nph = GenotypeDensities::from(path.y[i]).to_nph().map_err(|e| e.to_string())?;
            close(&format!("p({t})"), nph.p, f(&row["p"]), tol)?;
            close(&format!("h({t})"), nph.h, f(&row["h"]), tol)?;
        }
    }
    Ok(())
}

pub fn neutral_eigen() -> Check {
    let fx = fixture("neutral_eigen");
    let g = NeutralGeometry::new(f(&fx["f"]), f(&fx["d"]), f(&fx["c"])).map_err(|e| e.to_string())?;
    let mut ours = g.eigenvalues();
    ours.sort_by(f64::total_cmp);
    for c in fx["cases"].as_array().unwrap() {
        let v = f(&c["v"]);
        let point = arr::<3>(&c["point"]);
        let gamma = g.gamma(v);
        for i in 0..3 {
            close("fixed-point line", gamma[i], point[i], 1e-12)?;
        }
        ensure(f(&c["residual"]) < 1e-10, || "oracle residual on the line".into())?;
        let want = arr::<3>(&c["eigenvalues"]);
        for i in 0..3 {
            close("neutral eigenvalue", ours[i], want[i], f(&fx["tolerance"]))?;
        }
    }
    Ok(())
}

pub fn zero_roots() -> Check {
    let fx = fixture("zero_roots");
    let model = gaussian_model(&fx["model"]);
    let tol = f(&fx["tolerance"]);
    for c in fx["cases"].as_array().unwrap() {
        let dm = DimorphicModel::new(&model, f(&c["u_resident"]), f(&c["u_mutant"])).map_err(|e| e.to_string())?;
        let g = NeutralGeometry::for_resident(&dm).map_err(|e| e.to_string())?;
        let rep = count_zeros_near_curve(&dm, &g, &Default::default()).map_err(|e| e.to_string())?;
        ensure(rep.count() == 2, || format!("expected two zeros, found {:?}", rep.roots))?;
        let opts = Default::default();
        let ends: Vec<[f64; 3]> = rep
            .roots
            .iter()
            .map(|&v| {
                let (r, s) = diploid_ad::dynamics::zero_curve(&dm, &g, v, &opts).unwrap();
                let (gm, e3) = (g.gamma(v), g.e3(v));
                std::array::from_fn(|i| (1.0 + r) * gm[i] + s * e3[i])
            })
            .collect();
        let (res, mutant) = (f(&c["resident_equilibrium"]), f(&c["mutant_equilibrium"]));
        close("resident end x", ends[0][0], res, tol)?;
        close("resident end y + z", ends[0][1].abs() + ends[0][2].abs(), 0.0, tol)?;
        close("mutant end z", ends[1][2], mutant, tol)?;
        close("mutant end x + y", ends[1][0].abs() + ends[1][1].abs(), 0.0, tol)?;
        let zeta = dm.zeta().abs();
        ensure((rep.roots[0] + g.n0).abs() <= 10.0 * zeta && (rep.roots[1] - g.n0).abs() <= 10.0 * zeta, || {
            format!("roots {:?} not within O(zeta) of -+n0 = {}", rep.roots, g.n0)
        })?;
    }
    Ok(())
}

pub fn jump_density() -> Check {
    let fx = fixture("jump_density");
    let model = gaussian_model(&fx["model"]);
    let u = f(&fx["u"]);
    for c in fx["cases"].as_array().unwrap() {
        let got = jump_rate_density(&model, u, f(&c["h"])).map_err(|e| e.to_string())?;
        close_rel("jump density", got, f(&c["density"]), f(&fx["relative_tolerance"]), f(&fx["absolute_tolerance"]))?;
    }
    Ok(())
}

pub fn jump_rates() -> Check {
    let fx = fixture("jump_rates");
    let rel = f(&fx["relative_tolerance"]);
    for row in fx["directional"]["rows"].as_array().unwrap() {
        let mut d = fx["directional"]["model"].clone();
        d["sigma"] = row["sigma"].clone();
        let model = gaussian_model(&d);
        let rate = total_jump_rate(&model, f(&row["u"])).map_err(|e| e.to_string())?;
        close_rel("total jump rate", rate, f(&row["rate"]), rel, 0.0)?;
        if f(&row["sigma"]) <= 1e-3 {
            close_rel("small-sigma asymptotics", rate, f(&row["asymptotic"]), f(&fx["asymptotic_tolerance"]), 0.0)?;
        }
    }
    let mut rates = Vec::new();
    for row in fx["interior"]["rows"].as_array().unwrap() {
        let mut d = fx["interior"]["model"].clone();
        d["sigma"] = row["sigma"].clone();
        let model = gaussian_model(&d);
        let rate = total_jump_rate(&model, f(&row["u"])).map_err(|e| e.to_string())?;
        close_rel("jump rate at the singular strategy", rate, f(&row["rate"]), rel, 1e-15)?;
        rates.push(rate);
    }
    ensure(rates.windows(2).all(|w| w[1] < w[0]), || format!("rate at the singular point not shrinking with sigma: {rates:?}"))
}

/// Quadrature CDF of the accepted step at resident `u`.
pub fn step_cdf(model: &DemographyModel, u: f64, h: f64) -> f64 {
    let (lo, hi) = model.mutation_law().support(u);
    let opts = QuadOptions {
        atol: 1e-14,
        rtol: 1e-12,
        ..QuadOptions::default()
    };
    let dens = |x: f64| jump_rate_density(model, u, x).unwrap();
    let total = integrate_pieces(dens, &[lo, 0.0, hi], &opts).unwrap().0;
    let h = h.clamp(lo, hi);
    let mut pts = vec![lo];
    if h > 0.0 {
        pts.push(0.0);
    }
    pts.push(h);
    if h <= lo {
        return 0.0;
    }
    integrate_pieces(dens, &pts, &opts).unwrap().0 / total
}

pub fn step_law() -> Check {
    let fx = fixture("step_cdf");
    let model = gaussian_model(&fx["model"]);
    let u = f(&fx["u"]);
    let tol = f(&fx["tolerance"]);
    for c in fx["cases"].as_array().unwrap() {
        close("step CDF", step_cdf(&model, u, f(&c["h"])), f(&c["cdf"]), tol)?;
    }
    let sampler = JumpSampler::new(&model, u).map_err(|e| e.to_string())?;
    close_rel("sampler rate", sampler.rate(), f(&fx["rate"]), 1e-7, 0.0)?;
    let n = fx["draws"].as_u64().unwrap() as usize;
    // tabulate the CDF once and interpolate; the table is far finer than the KS band
    let (lo, hi) = model.mutation_law().support(u);
    let cells = 2000;
    let table: Vec<f64> = (0..=cells)
        .map(|i| step_cdf(&model, u, lo + (hi - lo) * i as f64 / cells as f64))
        .collect();
    let cdf = |h: f64| {
        let x = (h - lo) / (hi - lo) * cells as f64;
        let i = (x.floor().max(0.0) as usize).min(cells - 1);
        let w = x - i as f64;
        table[i] * (1.0 - w) + table[i + 1] * w
    };
    // five independent batches; a correct sampler fails two or more 1% tests
    // with probability about 1e-3
    let mut rejected = Vec::new();
    for batch in 0..5 {
        let mut rng = stream(303, batch);
        let mut steps: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng).unwrap().unwrap().1).collect();
        steps.sort_by(f64::total_cmp);
        let d = ks_statistic(&steps, cdf);
        if d >= ks_critical_1pct(n) {
            rejected.push(d);
        }
    }
    ensure(rejected.len() <= 1, || format!("KS statistics {rejected:?} above the 1% critical value"))
}

pub fn singular_ecological() -> Check {
    let fx = fixture("singular_ecological");
    for c in fx["cases"].as_array().unwrap() {
        let mut d = fx["model"].clone();
        d["phi_0"] = c["phi_0"].clone();
        let model = gaussian_model(&d);
        let found = find_singular_strategies(&model, 400).map_err(|e| e.to_string())?;
        ensure(found.len() == 1, || format!("expected one singular strategy, got {found:?}"))?;
        close("singular strategy", found[0].u, f(&c["u"]), f(&fx["tolerance"]))?;
        ensure(found[0].kind == diploid_ad::tss::SingularKind::Ecological, || "not ecological".into())?;
    }
    Ok(())
}

pub fn m1() -> Check {
    let fx = fixture("m1_modulus");
    let times: Vec<f64> = fx["times"].as_array().unwrap().iter().map(f).collect();
    for c in fx["cases"].as_array().unwrap() {
        let values: Vec<f64> = c["values"].as_array().unwrap().iter().map(f).collect();
        let got = m1_modulus(&times, &values, f(&c["delta"])).map_err(|e| e.to_string())?;
        close(&format!("M1 modulus of {}", c["name"]), got, f(&c["modulus"]), f(&fx["tolerance"]))?;
    }
    Ok(())
}

pub fn gradient_regression() -> Check {
    let fx = fixture("gradient_regression");
    for c in fx["cases"].as_array().unwrap() {
        let model = gaussian_model(&c["model"]);
        let got = selection_gradient(&model, f(&c["u"])).map_err(|e| e.to_string())?;
        close("selection gradient", got, f(&c["slope"]), f(&fx["tolerance"]))?;
    }
    Ok(())
}

pub fn canonical_rates() -> Check {
    let fx = fixture("canonical_rates");
    let tol = f(&fx["tolerance"]);
    let model = gaussian_model(&fx["model"]);
    let skewed = DemographyModel::new(
        model
            .spec()
            .clone()
            .with_mutation(MutationKernel::Skewed {
                right_mass: f(&fx["right_mass"]),
            }),
    )
    .unwrap();
    let opts = CanonicalOptions::default();
    for c in fx["cases"].as_array().unwrap() {
        let u = f(&c["u"]);
        let e = |r: diploid_ad::Result<f64>| r.map_err(|e| e.to_string());
        close("symmetric form", e(rhs_symmetric(&model, u, &opts))?, f(&c["symmetric"]), tol)?;
        close("general form", e(rhs_general(&model, u, &opts))?, f(&c["general"]), tol)?;
        let asym = e(rhs_general(&skewed, u, &opts))?;
        close("general form, skewed kernel", asym, f(&c["skewed_general"]), tol)?;
        ensure(asym > f(&c["symmetric"]), || "right-skewed kernel should speed up an increasing trait".into())?;
    }
    Ok(())
}

pub fn chain_rule() -> Check {
    let fx = fixture("chain_rule");
    let coeffs: Vec<f64> = fx["coeffs"].as_array().unwrap().iter().map(f).collect();
    let spec = ModelSpec::gaussian(
        TraitSpace::new(0.0, 1.0).unwrap(),
        f(&fx["f"]),
        f(&fx["d"]),
        f(&fx["sigma_a"]),
        f(&fx["sigma_k"]),
        f(&fx["phi_0"]),
    )
    .with_phenotype(PhenotypeMap::Polynomial {
        coeffs,
        dominance: f(&fx["dominance"]),
    });
    let model = DemographyModel::new(spec).map_err(|e| e.to_string())?;
    let tol = f(&fx["tolerance"]);
    let opts = CanonicalOptions::default();
    for c in fx["cases"].as_array().unwrap() {
        let u = f(&c["u"]);
        let du = rhs_symmetric(&model, u, &opts).map_err(|e| e.to_string())?;
        close("allelic rate", du, f(&c["allelic_rate"]), tol)?;
        let big = rhs_phenotypic(&model, f(&c["phenotype"]), &opts).map_err(|e| e.to_string())?;
        close("phenotypic rate", big.rate, f(&c["phenotypic_rate"]), tol)?;
        close("allele recovered from phenotype", big.u, u, 1e-10)?;
        close("dU = 2 d1phi du", big.rate, 2.0 * model.phi_d1(u, u) * du, tol)?;
    }
    Ok(())
}

pub fn extinction() -> Check {
    let fx = fixture("extinction");
    let comp = fx["competition"].as_array().unwrap();
    let dm = DimorphicModel::from_constants(
        arr::<3>(&fx["fertility"]),
        arr::<3>(&fx["death"]),
        [arr::<3>(&comp[0]), arr::<3>(&comp[1]), arr::<3>(&comp[2])],
    );
    let spec = BranchingSpec::from_dimorphic(&dm).map_err(|e| e.to_string())?;
    let (_, q) = integrate_extinction(&spec, Some(200.0)).map_err(|e| e.to_string())?;
    let tol = f(&fx["tolerance"]);
    close("q1(200)", q.q1, f(&fx["q1"]), tol)?;
    close("q2(200)", q.q2, f(&fx["q2"]), tol)?;
    let p = extinction_fixed_point(&spec).map_err(|e| e.to_string())?;
    close("closed-form q1", p.q1, f(&fx["q1"]), tol)?;
    close("closed-form q2", p.q2, f(&fx["q2"]), tol)?;
    let s = survival_probability(&dm).map_err(|e| e.to_string())?;
    close("survival formula", s, f(&fx["survival"]), 1e-15)?;
    close("1 - q1 against the formula", 1.0 - q.q1, s, f(&fx["survival_tolerance"]))
}

pub fn wilson() -> Check {
    let fx = fixture("wilson");
    let tol = f(&fx["tolerance"]);
    for c in fx["cases"].as_array().unwrap() {
        let p = Proportion::new(c["successes"].as_u64().unwrap(), c["trials"].as_u64().unwrap());
        close("Wilson lower bound", p.ci_low, f(&c["low"]), tol)?;
        close("Wilson upper bound", p.ci_high, f(&c["high"]), tol)?;
    }
    // at a fixed proportion the interval narrows as replicates grow
    let widths: Vec<f64> = [100, 1000, 10000]
        .iter()
        .map(|&n| {
            let p = Proportion::new(n * 23 / 100, n);
            p.ci_high - p.ci_low
        })
        .collect();
    ensure(widths.windows(2).all(|w| w[1] < w[0]), || format!("CI widths {widths:?} not shrinking"))
}

pub fn neutral_invasion() -> Check {
    let fx = fixture("neutral_invasion");
    let mut estimates = Vec::new();
    for k in fx["ks"].as_array().unwrap() {
        let model = DemographyModel::new(
            ModelSpec::logistic(f(&fx["f"]), f(&fx["d"]), f(&fx["c"])).with_k(k.as_u64().unwrap()),
        )
        .unwrap();
        let setup = diploid_ad::invasion::InvasionSetup::new(0.2, 0.7, f(&fx["epsilon"]), fx["replicates"].as_u64().unwrap());
        let est = diploid_ad::invasion::monte_carlo_invasion(&model, &setup, 404).map_err(|e| e.to_string())?;
        estimates.push(est.survival.estimate);
    }
    ensure(estimates.windows(2).all(|w| w[1] < w[0]), || format!("neutral invasion frequency not shrinking with K: {estimates:?}"))
}

/// Every fixture check with its name.
pub fn all() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("phenotype additivity", phenotype_additivity as CheckFn),
        ("gaussian kernel", gaussian_kernel),
        ("mutation moments", mutation_moments),
        ("ibm rates", ibm_rates),
        ("mendelian law", mendelian),
        ("logistic", logistic),
        ("dimorphic field", dimorphic_rhs),
        ("third eigenvalue", third_eigenvalue),
        ("neutral flow", neutral_flow),
        ("neutral eigenvalues", neutral_eigen),
        ("zero-curve roots", zero_roots),
        ("jump density", jump_density),
        ("jump rates", jump_rates),
        ("step law", step_law),
        ("ecological singular strategy", singular_ecological),
        ("M1 modulus", m1),
        ("gradient regression", gradient_regression),
        ("canonical rates", canonical_rates),
        ("chain rule", chain_rule),
        ("extinction ODE", extinction),
        ("Wilson interval", wilson),
        ("neutral invasion", neutral_invasion),
    ]
}
