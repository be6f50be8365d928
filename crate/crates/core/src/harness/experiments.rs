use std::fmt::Write as _;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::params::{Kind, ParamDef, Params};
use super::{Experiment, Outcome};
use crate::blockcut::{constant_potential_instance, explore_all, mirrored_dipole_instance, ExplorationInstance, ExplorationReport};
use crate::diamond::{diamond_peel, first_non_integer_laplacian};
use crate::error::{param, LabError, Result};
use crate::field::{qf, ScalarField, Q};
use crate::flow::{boundary_targets, disjoint_paths, verify_certificate};
use crate::gadget::{gadget_table, gadget_table_csv};
use crate::graph::ClusterGraph;
use crate::harmonic::{
    corrected_plane, corrector_stats, edge_flip_sensitivity, embedding_flip, embedding_svg, homogenized_flux, removable_edges,
};
use crate::lattice::{l1, site2, sub, BoxRegion, Site};
use crate::percolation::{derive_seed, sample_cluster, sample_percolation};
use crate::potential::{fit_kappa, potential, sensitive_edges, sites_csv, two_scale_check, PoleFunction};
use crate::sandpile::{
    count_spanning_trees, gadget_frequency, group_json, l2_mixing_curve, laplacian_times, markov_step, plant_gadget, plateau_time,
    run_chain, slow_mixing_gadget_census, spectrum_csv, toppling_invariants, CurveMode, Diagonal, SandpileState,
};
use crate::solver::SolveOptions;

const SEED: ParamDef = ParamDef::new("seed", Kind::Int, "1", "top-level seed; replicate seeds are derived from it");

macro_rules! schema {
    ($($key:literal, $kind:ident, $default:literal, $help:literal;)*) => {
        &[SEED, $(ParamDef::new($key, Kind::$kind, $default, $help)),*]
    };
}

pub(super) static CATALOGUE: &[Experiment] = &[
    Experiment {
        name: "gadget-table",
        anchor: "exact effective resistance of the rigid gadget and its approach to 1+√3",
        params: schema! {
            "n_max", Int, "25", "largest gadget level in the table";
            "solve_up_to", Int, "12", "levels also checked by an exact Dirichlet solve";
        },
        validate: gadget_table_validate,
        run: gadget_table_run,
    },
    Experiment {
        name: "embedding-flip",
        anchor: "harmonic embedding of a percolation cluster before and after one edge flip",
        params: schema! {
            "n", Int, "50", "box radius";
            "p", Float, "0.8", "edge probability";
            "radius", Int, "10", "the flipped edge is the removable edge nearest the centre within this radius";
            "tolerance", Float, "1e-12", "solver tolerance";
        },
        validate: |p| {
            p.int_in("n", 4, 1000)?;
            p.prob("p")?;
            p.int_in("radius", 0, p.int("n") - 1)?;
            p.positive("tolerance").map(drop)
        },
        run: embedding_flip_run,
    },
    Experiment {
        name: "corrector-sublinearity",
        anchor: "sublinear oscillation of the first-order corrector on growing balls",
        params: schema! {
            "d", Int, "2", "dimension (2 or 3)";
            "n", Int, "128", "box radius";
            "p", Float, "0.8", "edge probability";
            "seeds", Int, "16", "number of replicate environments";
            "radii", IntList, "16,32,64", "ball radii, at most n/2";
            "tolerance", Float, "1e-10", "solver tolerance";
        },
        validate: corrector_validate,
        run: corrector_run,
    },
    Experiment {
        name: "sensitivity-identity",
        anchor: "change of the corrected plane under edge removal as a combination of Green's function gradients",
        params: schema! {
            "n", Int, "64", "box radius";
            "p_values", FloatList, "1.0,0.8", "edge probabilities";
            "flips", Int, "3", "number of removed edges per sample";
            "seeds", Int, "4", "samples per edge probability";
            "tolerance", Float, "1e-12", "tight solver tolerance";
            "loose_factor", Float, "100", "the loose tolerance is tolerance times this factor";
            "max_discrepancy", Float, "1e-6", "largest acceptable discrepancy at the tight tolerance";
            "min_improvement", Float, "10", "required shrink factor of the discrepancy from loose to tight";
        },
        validate: sensitivity_validate,
        run: sensitivity_run,
    },
    Experiment {
        name: "flux-ahat",
        anchor: "homogenized coefficient as the boundary flux of the corrected plane",
        params: schema! {
            "n", Int, "128", "box radius";
            "p", Float, "0.8", "edge probability";
            "seeds", Int, "16", "number of replicate environments";
            "tolerance", Float, "1e-10", "solver tolerance";
            "exact_n", Int, "16", "box radius of the exact full-lattice check";
        },
        validate: |p| {
            p.int_in("n", 4, 2000)?;
            p.prob("p")?;
            p.int_in("seeds", 2, 10_000)?;
            p.int_in("exact_n", 2, 30)?;
            p.positive("tolerance").map(drop)
        },
        run: flux_run,
    },
    Experiment {
        name: "potential-two-scale",
        anchor: "potential of an integer pole function against the continuum dipole prediction",
        params: schema! {
            "n", Int, "256", "box radius";
            "p", Float, "1.0", "edge probability";
            "poles", Poles, "1,0:1;0,0:-1", "pole function as x,y:weight entries, summing to zero";
            "direction", FloatList, "1,0", "direction of the sampling ray";
            "radii", IntList, "16,32,64", "distances along the ray, at most n/4";
            "tolerance", Float, "1e-10", "solver tolerance";
        },
        validate: two_scale_validate,
        run: two_scale_run,
    },
    Experiment {
        name: "sensitive-density",
        anchor: "density of edges where both the potential and the corrected plane have nonzero gradient",
        params: schema! {
            "n", Int, "256", "box radius";
            "p", Float, "0.8", "edge probability";
            "seeds", Int, "8", "number of replicate environments";
            "min_density", Float, "1e-4", "density threshold at the largest dyadic scale inside the half box";
            "min_passing", Int, "6", "replicates that must reach the threshold";
            "tolerance", Float, "1e-10", "solver tolerance";
            "relative_zero", Float, "1e-9", "gradients below this times the field scale count as zero";
        },
        validate: |p| {
            p.int_in("n", 4, 2000)?;
            p.prob("p")?;
            let k = p.int_in("seeds", 1, 10_000)?;
            p.int_in("min_passing", 0, k)?;
            p.positive("min_density")?;
            p.positive("relative_zero")?;
            p.positive("tolerance").map(drop)
        },
        run: sensitive_density_run,
    },
    Experiment {
        name: "blockcut-explore",
        anchor: "flux-maximising walk down the block-cut tree of an increasing level-set subgraph",
        params: schema! {
            "n", Int, "10", "box radius of the mirrored dipole instances";
            "p", Float, "0.8", "edge probability";
            "seeds", Int, "12", "mirrored dipole instances";
            "plane_n", Int, "8", "box radius of the constant-potential instances";
            "plane_seeds", Int, "6", "constant-potential instances";
        },
        validate: |p| {
            p.int_in("n", 3, 20)?;
            p.int_in("plane_n", 3, 20)?;
            p.prob("p")?;
            p.int_in("seeds", 0, 1000)?;
            p.int_in("plane_seeds", 0, 1000).map(drop)
        },
        run: blockcut_run,
    },
    Experiment {
        name: "disjoint-paths",
        anchor: "vertex-disjoint paths from a finite set to the box boundary with a separating set",
        params: schema! {
            "n", Int, "32", "box radius";
            "p", Float, "0.8", "edge probability";
            "seeds", Int, "8", "number of replicate environments";
            "set_radius", Int, "1", "the source set is the cluster inside this sup-distance of the centre";
        },
        validate: |p| {
            let n = p.int_in("n", 2, 500)?;
            p.prob("p")?;
            p.int_in("seeds", 1, 10_000)?;
            p.int_in("set_radius", 0, n - 2).map(drop)
        },
        run: disjoint_paths_run,
    },
    Experiment {
        name: "diamond-peel",
        anchor: "compactly supported functions on the plane with integer Laplacian are integer valued",
        params: schema! {
            "n", Int, "6", "box radius";
            "radius", Int, "3", "support lies in the l1 diamond of this radius";
            "fields", Int, "100", "number of random fields";
            "amplitude", Int, "3", "values are drawn from -amplitude..=amplitude";
        },
        validate: |p| {
            let n = p.int_in("n", 2, 60)?;
            p.int_in("radius", 0, n - 1)?;
            p.int_in("fields", 1, 100_000)?;
            p.int_in("amplitude", 1, 1_000_000).map(drop)
        },
        run: diamond_run,
    },
    Experiment {
        name: "sandpile-density",
        anchor: "mean chip density of the sandpile chain on a percolation cluster",
        params: schema! {
            "n", Int, "40", "box radius";
            "p_values", FloatList, "1.0,0.75", "edge probabilities to compare";
            "steps", Int, "200000", "chain steps per chain";
            "record_every", Int, "2000", "trace resolution";
            "chains", Int, "2", "independent chains from saturation per edge probability";
            "band", Float, "0.02", "relative band of the plateau";
            "check_n", Int, "5", "box radius of the cluster used for odometer and invariant bookkeeping";
            "check_steps", Int, "500", "steps with odometer and invariant bookkeeping";
        },
        validate: |p| {
            p.int_in("n", 2, 200)?;
            p.int_in("check_n", 1, 10)?;
            if p.floats("p_values").iter().any(|&q| !(q > 0.0 && q <= 1.0)) {
                return param("p_values must lie in (0, 1]");
            }
            p.int_in("steps", 1, 100_000_000)?;
            p.int_in("record_every", 1, 100_000_000)?;
            p.int_in("chains", 1, 1000)?;
            p.int_in("check_steps", 0, 1_000_000)?;
            p.positive("band").map(drop)
        },
        run: sandpile_density_run,
    },
    Experiment {
        name: "spectrum-table",
        anchor: "multiplicative harmonic functions and the spectrum of the sandpile chain",
        params: schema! {
            "n", Int, "2", "box radius of the sampled cluster";
            "p", Float, "0.6", "edge probability of the sampled cluster";
            "cap", Int, "1000000", "largest group enumerated exactly";
            "times", IntList, "0,1,2,5,10,20,50,100", "times of the l2 curve";
        },
        validate: |p| {
            p.int_in("n", 1, 6)?;
            p.prob("p")?;
            p.int_in("cap", 1, 100_000_000)?;
            if p.ints("times").iter().any(|&t| t < 0) {
                return param("times must be nonnegative");
            }
            Ok(())
        },
        run: spectrum_run,
    },
    Experiment {
        name: "gadget-census",
        anchor: "census of slow-mixing square gadgets and their exact eigenvalue",
        params: schema! {
            "sizes", IntList, "100,200", "box radii of the census";
            "p", Float, "0.75", "edge probability";
            "seeds", Int, "8", "samples per size";
            "plant_n", Int, "8", "box radius of the planted full-lattice example";
        },
        validate: |p| {
            let sizes = p.ints("sizes");
            if sizes.len() < 2 || sizes.iter().any(|&n| !(4..=1000).contains(&n)) || sizes.windows(2).any(|w| w[1] <= w[0]) {
                return param("sizes must be at least two increasing radii in 4..=1000");
            }
            p.prob("p")?;
            p.int_in("seeds", 1, 1000)?;
            p.int_in("plant_n", 5, 100).map(drop)
        },
        run: census_run,
    },
];

fn replicate_seeds(p: &Params, key: &str) -> Vec<u64> {
    (0..p.int(key) as u64).map(|i| derive_seed(p.seed(), i)).collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        s[k / 2]
    } else {
        (s[k / 2 - 1] + s[k / 2]) / 2.0
    }
}

fn tol(p: &Params) -> SolveOptions {
    SolveOptions::with_tolerance(p.float("tolerance"))
}

fn e1(d: usize) -> Vec<f64> {
    (0..d).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect()
}

fn pretty(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s.into_bytes()
}

// gadget-table

fn gadget_table_validate(p: &Params) -> Result<()> {
    let n = p.int_in("n_max", 1, 200)?;
    p.int_in("solve_up_to", 0, n.min(20)).map(drop)
}

fn gadget_table_run(p: &Params) -> Result<Outcome> {
    let rows = gadget_table(p.int("n_max") as usize, p.int("solve_up_to") as usize)?;
    let mut out = Outcome { replicate_seeds: vec![], ..Default::default() };
    out.file("gadget_table.csv", gadget_table_csv(&rows));
    let solved: Vec<_> = rows.iter().filter(|r| r.r_solve.is_some()).collect();
    out.check(
        "exact solve equals the recurrence",
        solved.iter().all(|r| r.r_solve.as_ref() == Some(&r.r)),
        format!("{} levels solved", solved.len()),
    );
    out.check(
        "resistance is A_{n+1}/B_n in lowest terms",
        rows.iter().all(|r| r.r == BigRational::new(r.a_next.clone(), r.b.clone()) && r.a_next.gcd(&r.b).is_one()),
        "",
    );
    let three = num_bigint::BigInt::from(3);
    out.check("A_{n+1} exceeds 3^(n-1)", rows.iter().all(|r| r.a_next > Pow::pow(&three, (r.n - 1) as u32)), "");
    out.check(
        "distance to 1+√3 strictly decreasing",
        rows.windows(2).all(|w| w[1].distance < w[0].distance),
        format!("last distance {:e}", rows.last().map_or(f64::NAN, |r| r.distance)),
    );
    out.summary = json!({ "levels": rows.len(), "last_distance": rows.last().map(|r| r.distance) });
    Ok(out)
}

// embedding-flip

fn embedding_flip_run(p: &Params) -> Result<Outcome> {
    let n = p.int("n") as i32;
    let s = sample_percolation(BoxRegion::new(2, n)?, p.float("p"), p.seed())?;
    let g = s.largest_cluster()?;
    let e = *removable_edges(&g, 1, p.int("radius") as i32)?
        .first()
        .ok_or_else(|| LabError::Precondition("no removable edge near the centre".into()))?;
    let (base, after, rep) = embedding_flip(&s, e, &tol(p))?;
    let mut out = Outcome { replicate_seeds: vec![p.seed()], ..Default::default() };
    out.file("embedding.svg", embedding_svg(&base, Some(&after)));
    let mut csv = String::from("inner_radius,median_displacement\n");
    for (r, m) in &rep.annulus_medians {
        let _ = writeln!(csv, "{r},{m:e}");
    }
    out.file("annuli.csv", csv);
    let m = &rep.annulus_medians;
    out.check("the flip moves the drawing", rep.max_displacement > 0.0, format!("max displacement {:e}", rep.max_displacement));
    out.check("displacement decays away from the flipped edge", m.len() >= 2 && m[m.len() - 1].1 < m[0].1, format!("{} annuli", m.len()));
    out.summary = json!({
        "flipped": [&e.a[..2], &e.b[..2]],
        "vertices": g.vertex_count(),
        "max_displacement": rep.max_displacement,
    });
    Ok(out)
}

// corrector-sublinearity

fn corrector_validate(p: &Params) -> Result<()> {
    p.int_in("d", 2, 3)?;
    let n = p.int_in("n", 4, 2000)?;
    p.prob("p")?;
    p.int_in("seeds", 1, 10_000)?;
    p.positive("tolerance")?;
    let radii = p.ints("radii");
    if radii.iter().any(|&r| r < 1 || 2 * r > n) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return param("radii must increase and lie in 1..=n/2");
    }
    Ok(())
}

fn corrector_run(p: &Params) -> Result<Outcome> {
    let (d, n, prob) = (p.int("d") as usize, p.int("n") as i32, p.float("p"));
    let radii: Vec<i32> = p.ints("radii").iter().map(|&r| r as i32).collect();
    let seeds = replicate_seeds(p, "seeds");
    let opts = tol(p);
    let stats: Vec<_> = seeds
        .par_iter()
        .map(|&s| {
            let g = sample_cluster(d, n, prob, s)?;
            corrector_stats(&corrected_plane(&g, &e1(d), &opts)?, &radii)
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("seed,radius,osc,osc_over_r,max_grad\n");
    for (s, st) in seeds.iter().zip(&stats) {
        for k in 0..radii.len() {
            let _ = writeln!(csv, "{s},{},{:?},{:?},{:?}", radii[k], st.osc[k], st.osc[k] / radii[k] as f64, st.max_grad[k]);
        }
    }
    let medians: Vec<f64> =
        (0..radii.len()).map(|k| median(&stats.iter().map(|st| st.osc[k] / radii[k] as f64).collect::<Vec<_>>())).collect();
    let mut mcsv = String::from("radius,median_osc_over_r\n");
    for (r, m) in radii.iter().zip(&medians) {
        let _ = writeln!(mcsv, "{r},{m:?}");
    }
    let mut out = Outcome { replicate_seeds: seeds, ..Default::default() };
    out.file("corrector.csv", csv);
    out.file("medians.csv", mcsv);
    out.check("median osc(χ, B_r)/r is nonincreasing in r", medians.windows(2).all(|w| w[1] <= w[0]), format!("{medians:?}"));
    out.summary = json!({ "radii": radii, "median_osc_over_r": medians });
    Ok(out)
}

// sensitivity-identity

fn sensitivity_validate(p: &Params) -> Result<()> {
    p.int_in("n", 8, 1000)?;
    if p.floats("p_values").iter().any(|&q| !(q > 0.0 && q <= 1.0)) {
        return param("p_values must lie in (0, 1]");
    }
    p.int_in("flips", 1, 100)?;
    p.int_in("seeds", 1, 1000)?;
    p.positive("tolerance")?;
    p.positive("max_discrepancy")?;
    p.positive("min_improvement")?;
    if p.float("loose_factor") <= 1.0 {
        return param("loose_factor must exceed 1");
    }
    Ok(())
}

fn sensitivity_run(p: &Params) -> Result<Outcome> {
    let n = p.int("n") as i32;
    let flips = p.int("flips") as usize;
    let tight = SolveOptions::with_tolerance(p.float("tolerance"));
    let loose = SolveOptions::with_tolerance(p.float("tolerance") * p.float("loose_factor"));
    let seeds = replicate_seeds(p, "seeds");
    let jobs: Vec<(f64, u64)> = p.floats("p_values").iter().flat_map(|&q| seeds.iter().map(move |&s| (q, s))).collect();
    let rows: Vec<(f64, u64, usize, f64, f64)> = jobs
        .par_iter()
        .map(|&(q, s)| {
            let g = sample_cluster(2, n, q, s)?;
            let edges = removable_edges(&g, flips, n / 4)?;
            if edges.len() < flips {
                return Err(LabError::Precondition(format!("only {} removable edges near the centre", edges.len())));
            }
            let a = edge_flip_sensitivity(&g, &edges, &[1.0, 0.0], &tight)?.max_abs_discrepancy;
            let b = edge_flip_sensitivity(&g, &edges, &[1.0, 0.0], &loose)?.max_abs_discrepancy;
            Ok((q, s, edges.len(), a, b))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("p,seed,removed,discrepancy_tight,discrepancy_loose,improvement\n");
    for (q, s, k, a, b) in &rows {
        let _ = writeln!(csv, "{q},{s},{k},{a:e},{b:e},{:e}", b / a);
    }
    let worst = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let least = rows.iter().map(|r| r.4 / r.3).fold(f64::INFINITY, f64::min);
    let mut out = Outcome { replicate_seeds: seeds, ..Default::default() };
    out.file("sensitivity.csv", csv);
    out.check("both sides agree at the tight tolerance", worst <= p.float("max_discrepancy"), format!("max discrepancy {worst:e}"));
    out.check(
        "the discrepancy shrinks with the solver tolerance",
        least >= p.float("min_improvement"),
        format!("smallest improvement {least:.1}x"),
    );
    out.summary = json!({ "max_discrepancy": worst, "min_improvement": least });
    Ok(out)
}

// flux-ahat

fn flux_run(p: &Params) -> Result<Outcome> {
    let (n, prob) = (p.int("n") as i32, p.float("p"));
    let seeds = replicate_seeds(p, "seeds");
    let opts = tol(p);
    let est: Vec<_> = seeds
        .par_iter()
        .map(|&s| homogenized_flux(&corrected_plane(&sample_cluster(2, n, prob, s)?, &[1.0, 0.0], &opts)?))
        .collect::<Result<_>>()?;
    let mut csv = String::from("seed,ahat,transverse,open_left_edges\n");
    for (s, e) in seeds.iter().zip(&est) {
        let _ = writeln!(csv, "{s},{:?},{:?},{}", e.per_site, e.transverse, e.open_edges);
    }
    let k = est.len() as f64;
    let ahat: Vec<f64> = est.iter().map(|e| e.per_site).collect();
    let mean_a = ahat.iter().sum::<f64>() / k;
    let tr: Vec<f64> = est.iter().map(|e| e.transverse).collect();
    let mean_t = tr.iter().sum::<f64>() / k;
    let se_t = (tr.iter().map(|t| (t - mean_t).powi(2)).sum::<f64>() / (k - 1.0)).sqrt() / k.sqrt();

    let full = sample_cluster(2, p.int("exact_n") as i32, 1.0, 0)?;
    let exact = homogenized_flux(&corrected_plane(&full, &[1.0, 0.0], &SolveOptions::exact())?)?;

    let mut out = Outcome { replicate_seeds: seeds, ..Default::default() };
    out.file("flux.csv", csv);
    if prob < 1.0 {
        out.check(
            "every estimate of the homogenized coefficient lies in (0, 1)",
            ahat.iter().all(|&a| a > 0.0 && a < 1.0),
            format!("mean {mean_a:.4}"),
        );
    }
    out.check(
        "transverse flux mean within three standard errors of zero",
        mean_t.abs() <= 3.0 * se_t,
        format!("mean {mean_t:e}, standard error {se_t:e}"),
    );
    out.check(
        "per-edge flux is exactly 1 on the full lattice",
        exact.per_open_edge == 1.0 && exact.per_site == 1.0,
        format!("{}", exact.per_open_edge),
    );
    out.summary = json!({ "ahat_mean": mean_a, "ahat_median": median(&ahat), "transverse_mean": mean_t, "transverse_se": se_t });
    Ok(out)
}

// potential-two-scale

fn two_scale_validate(p: &Params) -> Result<()> {
    let n = p.int_in("n", 16, 2000)?;
    p.prob("p")?;
    p.positive("tolerance")?;
    let poles = p.poles("poles");
    if poles.iter().map(|(_, w)| w).sum::<i64>() != 0 {
        return param("pole weights must sum to zero");
    }
    if poles.iter().any(|(x, _)| 4 * x[0].abs().max(x[1].abs()) as i64 > n) {
        return param("poles must lie within n/4 of the centre");
    }
    let dir = p.floats("direction");
    if dir.len() != 2 || dir.iter().all(|&v| v == 0.0) {
        return param("direction must be a nonzero planar vector");
    }
    if p.ints("radii").iter().any(|&r| r < 1 || 4 * r > n) {
        return param("radii must lie in 1..=n/4");
    }
    Ok(())
}

fn two_scale_run(p: &Params) -> Result<Outcome> {
    let g = sample_cluster(2, p.int("n") as i32, p.float("p"), p.seed())?;
    let poles = p.poles("poles");
    if let Some((x, _)) = poles.iter().find(|(x, _)| !g.contains(*x)) {
        return Err(LabError::Precondition(format!("pole {:?} is not in the cluster", &x[..2])));
    }
    let f = PoleFunction::new(&poles);
    let opts = tol(p);
    let pot = potential(&g, &f, &opts)?;
    let px = corrected_plane(&g, &[1.0, 0.0], &opts)?;
    let py = corrected_plane(&g, &[0.0, 1.0], &opts)?;
    let kappa = fit_kappa(&g, &opts)?;
    let dir = p.floats("direction");
    let radii: Vec<i32> = p.ints("radii").iter().map(|&r| r as i32).collect();
    let t = two_scale_check(&pot, [&px, &py], [dir[0], dir[1]], &radii, kappa)?;
    let mut out = Outcome { replicate_seeds: vec![p.seed()], ..Default::default() };
    out.file("two_scale.csv", t.to_csv());
    let scaled: Vec<f64> = t.rows.iter().map(|r| r.mean_abs_error * r.radius as f64).collect();
    out.check("error times radius decreases along the ray", scaled.windows(2).all(|w| w[1] < w[0]), format!("{scaled:?}"));
    out.check(
        "the potential has the predicted sign on most of the ray",
        t.rows.iter().all(|r| r.sign_agreement > 0.5),
        format!("{:?}", t.rows.iter().map(|r| r.sign_agreement).collect::<Vec<_>>()),
    );
    out.summary = json!({ "kappa": kappa, "c": t.c, "warnings": pot.warnings });
    Ok(out)
}

// sensitive-density

fn sensitive_density_run(p: &Params) -> Result<Outcome> {
    let (n, prob) = (p.int("n") as i32, p.float("p"));
    let seeds = replicate_seeds(p, "seeds");
    let opts = tol(p);
    let rel = p.float("relative_zero");
    let kmax = (0..31).rev().find(|&k| (1i64 << k) <= (n / 2) as i64).unwrap_or(0);
    let res: Vec<_> = seeds
        .par_iter()
        .map(|&s| {
            let g = sample_cluster(2, n, prob, s)?;
            let e = *removable_edges(&g, 1, n / 4)?
                .first()
                .ok_or_else(|| LabError::Precondition("no interior cycle edge near the centre".into()))?;
            let pot = potential(&g, &PoleFunction::dipole(e.b, e.a), &opts)?;
            let plane = corrected_plane(&g, &[1.0, 0.0], &opts)?;
            let scale = pot.field.to_f64().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            sensitive_edges(&pot, &plane, rel * scale.max(f64::MIN_POSITIVE))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("seed,k,radius,density\n");
    for (s, se) in seeds.iter().zip(&res) {
        for (k, dens) in &se.densities {
            let _ = writeln!(csv, "{s},{k},{},{dens:e}", 1u64 << k);
        }
    }
    let at_k: Vec<f64> = res.iter().map(|se| se.densities.iter().find(|(k, _)| *k == kmax).map_or(0.0, |d| d.1)).collect();
    let passing = at_k.iter().filter(|&&v| v >= p.float("min_density")).count();
    let mut out = Outcome { replicate_seeds: seeds, ..Default::default() };
    out.file("densities.csv", csv);
    if let Some(se) = res.first() {
        out.file("sensitive_edges.csv", se.to_csv());
    }
    out.check(
        "sensitive-edge density reaches the threshold at the largest dyadic scale",
        passing as i64 >= p.int("min_passing"),
        format!("{passing}/{} replicates at radius {}", at_k.len(), 1u64 << kmax),
    );
    out.summary = json!({ "scale": 1u64 << kmax, "densities": at_k });
    Ok(out)
}

// blockcut-explore

struct Tally {
    runs: usize,
    ineq_checked: usize,
    ineq_failed: usize,
    telescoping_failed: usize,
    witnesses: usize,
    bad_witnesses: usize,
}

fn tally(inst: &ExplorationInstance, reps: &[ExplorationReport<Q>], t: &mut Tally, label: &str, seed: u64, csv: &mut String) {
    let g = &inst.graph;
    for r in reps {
        t.runs += 1;
        t.ineq_checked += r.ineq_component_checked + r.ineq_cut_checked;
        t.ineq_failed += r.ineq_component_failures + r.ineq_cut_failures;
        t.telescoping_failed += usize::from(!r.telescoping_holds());
        if let Some((y, z)) = r.witness {
            t.witnesses += 1;
            let (iy, iz) = (g.vertex_index(y), g.vertex_index(z));
            let ok = match (iy, iz) {
                (Some(a), Some(b)) => g.edge_between(a, b).is_some() && inst.u[a] != inst.u[b] && inst.l[a] != inst.l[b],
                _ => false,
            };
            t.bad_witnesses += usize::from(!ok);
        }
        let _ = writeln!(
            csv,
            "{label},{seed},{},{},{},{},{},{},{},{}",
            r.x0[0],
            r.x0[1],
            r.path.len(),
            r.witness.map_or(String::from("none"), |(y, z)| format!("{}:{}-{}:{}", y[0], y[1], z[0], z[1])),
            r.ineq_component_checked + r.ineq_cut_checked,
            r.ineq_component_failures + r.ineq_cut_failures,
            r.telescoping_lhs,
            r.telescoping_rhs,
        );
    }
}

fn blockcut_run(p: &Params) -> Result<Outcome> {
    let prob = p.float("p");
    let mut t = Tally { runs: 0, ineq_checked: 0, ineq_failed: 0, telescoping_failed: 0, witnesses: 0, bad_witnesses: 0 };
    let mut csv =
        String::from("mode,seed,x0_1,x0_2,path_length,witness,inequalities_checked,inequalities_failed,telescoping_lhs,telescoping_rhs\n");
    let mut best: Option<ExplorationReport<Q>> = None;
    let mut first_subgraph: Option<String> = None;
    let seeds = replicate_seeds(p, "seeds");
    let mut used = Vec::new();
    for &s in &seeds {
        let Some(inst) = mirrored_dipole_instance(p.int("n") as i32, prob, s)? else { continue };
        used.push(s);
        let reps = explore_all(&inst)?;
        if first_subgraph.is_none() {
            if let Some(r) = reps.first() {
                first_subgraph = Some(sites_csv(2, r.subgraph.vertices()));
            }
        }
        tally(&inst, &reps, &mut t, "mirrored-dipole", s, &mut csv);
    }
    let plane_seeds: Vec<u64> = (0..p.int("plane_seeds") as u64).map(|i| derive_seed(p.seed() ^ 0x9e37, i)).collect();
    for &s in &plane_seeds {
        let inst = constant_potential_instance(p.int("plane_n") as i32, prob, s)?;
        let reps = explore_all(&inst)?;
        tally(&inst, &reps, &mut t, "constant-potential", s, &mut csv);
        for r in reps {
            if best.as_ref().is_none_or(|b| r.path.len() > b.path.len()) {
                best = Some(r);
            }
        }
    }
    let mut out = Outcome { replicate_seeds: used.into_iter().chain(plane_seeds).collect(), ..Default::default() };
    out.file("explorations.csv", csv);
    if let Some(b) = &best {
        out.file("tree.txt", b.tree.to_text());
        out.file("tree.dot", b.tree.to_dot());
    }
    if let Some(s) = first_subgraph {
        out.file("increasing_subgraph.csv", s);
    }
    out.check(
        "flux inequalities hold on every explored subgraph",
        t.ineq_failed == 0 && t.ineq_checked > 0,
        format!("{} checked, {} failed", t.ineq_checked, t.ineq_failed),
    );
    out.check("telescoping bound holds on every terminating run", t.telescoping_failed == 0 && t.runs > 0, format!("{} runs", t.runs));
    out.check("witness edges carry nonzero gradients of both functions", t.bad_witnesses == 0, format!("{} witnesses", t.witnesses));
    out.summary = json!({
        "runs": t.runs,
        "inequalities_checked": t.ineq_checked,
        "witnesses": t.witnesses,
        "longest_path": best.map(|b| b.path.len()),
    });
    Ok(out)
}

// disjoint-paths

fn disjoint_paths_run(p: &Params) -> Result<Outcome> {
    let (n, prob, rad) = (p.int("n") as i32, p.float("p"), p.int("set_radius") as i32);
    let seeds = replicate_seeds(p, "seeds");
    let mut csv = String::from("seed,sources,count,direct_edges,separator,edge_boundary\n");
    let mut bad = 0;
    let mut over = 0;
    let mut first = None;
    for &s in &seeds {
        let g = sample_cluster(2, n, prob, s)?;
        let c = g.region.map_or([0; 3], |r| r.center);
        let src: Vec<Site> = g.vertices().iter().copied().filter(|&x| sub(x, c).iter().all(|v| v.abs() <= rad)).collect();
        if src.is_empty() {
            let _ = writeln!(csv, "{s},0,0,0,0,0");
            continue;
        }
        let tgt: Vec<Site> = boundary_targets(&g).into_iter().filter(|x| !src.contains(x)).collect();
        let cert = disjoint_paths(&g, &src, &tgt)?;
        bad += usize::from(verify_certificate(&g, &src, &tgt, &cert).is_err());
        let boundary = g.edges().iter().filter(|&&(a, b)| src.contains(&g.site(a)) != src.contains(&g.site(b))).count();
        over += usize::from(cert.count > boundary);
        let _ = writeln!(csv, "{s},{},{},{},{},{boundary}", src.len(), cert.count, cert.direct_edges, cert.separator.len());
        if first.is_none() {
            first = Some(cert);
        }
    }
    let full = sample_cluster(2, n, 1.0, 0)?;
    let centre = full.region.map_or([0; 3], |r| r.center);
    let single = disjoint_paths(&full, &[centre], &boundary_targets(&full))?.count;

    let mut out = Outcome { replicate_seeds: seeds, ..Default::default() };
    out.file("paths.csv", csv);
    if let Some(c) = &first {
        out.file("certificate.json", pretty(&serde_json::to_value(c).map_err(|e| LabError::Internal(e.to_string()))?));
    }
    out.check("every certificate verifies", bad == 0, "");
    out.check("no count exceeds the edge boundary of the source set", over == 0, "");
    out.check("a single vertex of the full lattice has four paths", single == 4, format!("{single}"));
    Ok(out)
}

// diamond-peel

fn diamond_run(p: &Params) -> Result<Outcome> {
    let n = p.int("n") as i32;
    let k = p.int("radius") as i32;
    let amp = p.int("amplitude");
    let g = Arc::new(sample_percolation(BoxRegion::new(2, n)?, 1.0, 0)?.largest_cluster()?);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(p.seed(), 0));
    let inside: Vec<usize> = (0..g.vertex_count()).filter(|&i| l1(g.site(i)) <= k).collect();
    let mut csv = String::from(
        "field,diamond_x,diamond_y,diamond_radius,peeled,integer_valued,perturbed_x,perturbed_y,witness_x,witness_y,rejected\n",
    );
    let (mut certified, mut rejected) = (0, 0);
    let fields = p.int("fields") as usize;
    for idx in 0..fields {
        let vals: Vec<Q> =
            (0..g.vertex_count()).map(|i| if l1(g.site(i)) <= k { qf(rng.gen_range(-amp..=amp), 1) } else { Q::zero() }).collect();
        let u = ScalarField::from_rational(&g, vals.clone())?;
        let v = diamond_peel(&u)?;
        certified += usize::from(v.integer_valued && u.values.rational()?.iter().all(|x| x.is_integer()));
        let mut bad = vals;
        let at = inside[rng.gen_range(0..inside.len())];
        bad[at] += qf(1, 2);
        let w = ScalarField::from_rational(&g, bad)?;
        let want = first_non_integer_laplacian(&w)?;
        let ok = match (want, diamond_peel(&w)) {
            (Some(x), Err(LabError::Precondition(msg))) => msg.contains(&format!("{x:?}")),
            _ => false,
        };
        rejected += usize::from(ok);
        let (dc, dk) = v.diamond.map_or((site2(0, 0), -1), |(c, r)| (c, r));
        let wx = want.unwrap_or(site2(i32::MIN, i32::MIN));
        let pa = g.site(at);
        let _ =
            writeln!(csv, "{idx},{},{},{dk},{},{},{},{},{},{},{ok}", dc[0], dc[1], v.peeled, v.integer_valued, pa[0], pa[1], wx[0], wx[1]);
    }
    let mut out = Outcome { replicate_seeds: vec![derive_seed(p.seed(), 0)], ..Default::default() };
    out.file("peel.csv", csv);
    out.check("every integer field is certified integer valued", certified == fields, format!("{certified}/{fields}"));
    out.check(
        "every half-integer perturbation is rejected at the first non-integer Laplacian",
        rejected == fields,
        format!("{rejected}/{fields}"),
    );
    Ok(out)
}

// sandpile-density

fn sandpile_density_run(p: &Params) -> Result<Outcome> {
    let n = p.int("n") as i32;
    let steps = p.int("steps") as u64;
    let every = p.int("record_every") as u64;
    let chains: Vec<u64> = replicate_seeds(p, "chains");
    let mut csv = String::from("p,chain,t,mean_chips\n");
    let (mut in_range, mut plateaus, mut summary) = (true, Vec::new(), Vec::new());
    for q in p.floats("p_values") {
        let g = sample_cluster(2, n, q, p.seed())?;
        let traces: Vec<Vec<(u64, f64)>> = chains.par_iter().map(|&s| run_chain(&g, steps, s, every)).collect::<Result<_>>()?;
        for (c, tr) in traces.iter().enumerate() {
            for (t, m) in tr {
                let _ = writeln!(csv, "{q},{c},{t},{m:?}");
            }
        }
        let maxdeg = (0..g.vertex_count()).map(|v| g.full_degree(v)).max().unwrap_or(0) as f64;
        in_range &= traces.iter().flatten().all(|&(_, m)| (0.0..=maxdeg - 1.0).contains(&m));
        let pt: Vec<Option<u64>> = traces.iter().map(|tr| plateau_time(tr, p.float("band"))).collect();
        summary.push(json!({
            "p": q,
            "vertices": g.vertex_count(),
            "final_means": traces.iter().map(|t| t.last().map(|x| x.1)).collect::<Vec<_>>(),
            "plateau_times": pt,
        }));
        plateaus.extend(pt);
    }

    // exact bookkeeping on a small cluster, where the dual group is cheap
    let g = sample_cluster(2, p.int("check_n") as i32, p.floats("p_values")[0], p.seed())?;
    let dg = toppling_invariants(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(p.seed(), u64::MAX >> 1));
    let mut s = SandpileState::saturated(&g)?;
    let (mut odo_ok, mut conserved) = (true, true);
    for _ in 0..p.int("check_steps") {
        let (s2, v, odo) = markov_step(&s, &mut rng)?;
        let mut before = s.chips().to_vec();
        before[v] += 1;
        let lo = laplacian_times(&g, &odo);
        odo_ok &= before.iter().zip(&lo).zip(s2.chips()).all(|((b, l), a)| b - l == *a);
        conserved &= dg.generators.iter().all(|xi| xi.pairing(&before) == xi.pairing(s2.chips()));
        s = s2;
    }
    let mut out = Outcome { replicate_seeds: chains, ..Default::default() };
    out.file("density.csv", csv);
    out.check("mean chip count stays between 0 and the largest degree minus 1", in_range, "");
    out.check("every chain settles into a plateau", plateaus.iter().all(Option::is_some), format!("{plateaus:?}"));
    out.check("final state equals initial state minus L times the odometer", odo_ok, "");
    out.check("toppling invariants are conserved along the chain", conserved, format!("{} generators", dg.generators.len()));
    out.summary = json!({ "traces": summary, "check_vertices": g.vertex_count(), "group_order": dg.order.to_string() });
    Ok(out)
}

// spectrum-table

fn spectrum_run(p: &Params) -> Result<Outcome> {
    let x = site2(0, 0);
    let single = Arc::new(ClusterGraph::new(2, None, vec![x], &[])?.with_exterior_degree(&[(x, 4)])?);
    let sq = [x, site2(1, 0), site2(1, 1), site2(0, 1)];
    let edges: Vec<(Site, Site)> = (0..4).map(|k| (sq[k], sq[(k + 1) % 4])).collect();
    let block = Arc::new(ClusterGraph::new(2, None, sq.to_vec(), &edges)?.with_exterior_degree(&sq.map(|y| (y, 2)))?);
    let sampled = sample_cluster(2, p.int("n") as i32, p.float("p"), p.seed())?;
    let ts: Vec<u64> = p.ints("times").iter().map(|&t| t as u64).collect();
    let cap = p.int("cap") as u64;

    let mut out = Outcome { replicate_seeds: vec![p.seed()], ..Default::default() };
    let mut summary = serde_json::Map::new();
    let (mut orders_ok, mut disc_ok, mut verified) = (true, true, true);
    for (name, g) in [("single", &single), ("block", &block), ("sampled", &sampled)] {
        let dg = toppling_invariants(g)?;
        let trees = count_spanning_trees(g)?;
        orders_ok &= trees == dg.order;
        verified &= dg.verify();
        let mode = if dg.order <= cap.into() { CurveMode::Exact } else { CurveMode::LowerBound };
        let rep = l2_mixing_curve(&dg, g, &ts, mode, cap)?;
        disc_ok &= rep.eigenvalues.iter().all(|z| z.norm() <= 1.0 + 1e-12);
        out.file(&format!("spectrum_{name}.csv"), spectrum_csv(&rep));
        out.file(&format!("group_{name}.json"), group_json(&dg));
        summary.insert(
            name.into(),
            json!({ "vertices": g.vertex_count(), "order": dg.order.to_string(), "exact": rep.exact, "first_below_1e-3": rep.first_below(1e-3) }),
        );
        if name == "single" {
            let roots = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
            let found = rep.eigenvalues.len() == 4
                && roots.iter().all(|&(a, b)| rep.eigenvalues.iter().any(|z| (z.re - a).abs() < 1e-12 && (z.im - b).abs() < 1e-12));
            out.check("single-vertex spectrum is the fourth roots of unity", found, format!("{:?}", rep.eigenvalues));
            let flat = rep.curve.iter().all(|&(t, v)| t == 0 || (v - 3.0).abs() < 1e-12);
            out.check("single-vertex l2 curve is identically 3", flat, format!("{:?}", rep.curve));
        }
    }
    out.check("group order equals the spanning-tree count", orders_ok, "");
    out.check("dual groups verify", verified, "");
    out.check("every eigenvalue lies in the closed unit disc", disc_ok, "");
    out.summary = serde_json::Value::Object(summary);
    Ok(out)
}

// gadget-census

fn census_run(p: &Params) -> Result<Outcome> {
    let prob = p.float("p");
    let plant = sample_percolation(BoxRegion::new(2, p.int("plant_n") as i32)?, 1.0, 0)?;
    let planted = Arc::new(plant_gadget(&plant, site2(1, 2), Diagonal::Main)?.largest_cluster()?);
    let c = slow_mixing_gadget_census(&planted)?;
    let m = planted.vertex_count() as i64;
    let xi = match c.occurrences.first() {
        Some(o) => gadget_frequency(&planted, o)?,
        None => None,
    };
    let lam = c.eigenvalue.clone();

    let seeds = replicate_seeds(p, "seeds");
    let sizes = p.ints("sizes");
    let jobs: Vec<(i64, u64)> = sizes.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let rows: Vec<(i64, u64, usize, usize, bool)> = jobs
        .par_iter()
        .map(|&(n, s)| {
            let g = sample_cluster(2, n as i32, prob, s)?;
            let cs = slow_mixing_gadget_census(&g)?;
            let mm = g.vertex_count() as i64;
            let eig_ok = cs.eigenvalue.as_ref().is_none_or(|e| *e == qf(mm - 4, mm));
            Ok((n, s, g.vertex_count(), cs.multiplicity(), eig_ok))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("n,seed,vertices,multiplicity\n");
    for (n, s, v, k, _) in &rows {
        let _ = writeln!(csv, "{n},{s},{v},{k}");
    }
    let mean = |n: i64| {
        let v: Vec<f64> = rows.iter().filter(|r| r.0 == n).map(|r| r.3 as f64).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (n0, n1) = (sizes[0], sizes[sizes.len() - 1]);
    let area = ((2 * n1 + 1) as f64 / (2 * n0 + 1) as f64).powi(2);
    let ratio = mean(n1) / mean(n0);

    let mut out = Outcome { replicate_seeds: seeds, ..Default::default() };
    out.file("census.csv", csv);
    out.check(
        "the planted gadget frequency is a toppling invariant",
        c.multiplicity() == 1 && xi.as_ref().is_some_and(|x| x.is_toppling_invariant(&planted)),
        "",
    );
    out.check(
        "the planted gadget eigenvalue is exactly 1 - 4/m",
        lam == Some(qf(m - 4, m)),
        format!("m = {m}, eigenvalue {}", lam.as_ref().map_or("none".into(), |q| q.to_string())),
    );
    out.check("every census eigenvalue is 1 - 4/m", rows.iter().all(|r| r.4), "");
    out.check(
        "gadget multiplicity scales with the area within a factor 2",
        ratio.is_finite() && ratio >= area / 2.0 && ratio <= area * 2.0,
        format!("multiplicity ratio {ratio:.3}, area ratio {area:.3}"),
    );
    out.summary = json!({
        "planted_vertices": m,
        "planted_eigenvalue": lam.map(|q| q.to_string()),
        "one_minus_two_over_m": qf(m - 2, m).to_string(),
        "mean_multiplicity": sizes.iter().map(|&n| (n, mean(n))).collect::<Vec<_>>(),
    });
    Ok(out)
}
