//! Acceptance criteria of the simulator, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the lines reach the terminal uncaptured. The
//! process exits 0 once every criterion has been evaluated; set
//! `NSCM_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use nscm::harness::{run_experiment, sweep, transmission, ExperimentConfig, RunOptions, SweepAxis, SweepCell};
use nscm::linksim::{probe_response_native, LinkConfig};
use nscm::metrics::{gmi_estimate, ngmi, NGMI_HD_FEC, NGMI_SD_FEC};
use nscm::planner::{dispersion_nulls, plan_rate, BandSpec, Modulation};
use nscm::rxchain::{mlse_viterbi, TrellisSpec};
use nscm::shaping::{
    ccdm_decode, ccdm_encode, demap_llr, entropy, mb_distribution, mb_fit_entropy, pcs_qam, Ccdm, Composition,
    Constellation,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn flagship() -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/flagship.toml");
    ExperimentConfig::load(&path).expect("flagship config")
}

/// Sweep cells run at this many mean symbols per band.
const SWEEP_SYMBOLS: usize = 20_000;

fn sweep_config() -> ExperimentConfig {
    let mut cfg = flagship();
    cfg.tx.symbols_per_band = SWEEP_SYMBOLS;
    cfg
}

fn qam64_lattice() -> Vec<Complex64> {
    Constellation::square_qam(6).unwrap().lattice().to_vec()
}

fn random_bits(rng: &mut impl Rng, k: usize) -> Vec<u8> {
    (0..k).map(|_| rng.gen_range(0..2u8)).collect()
}

fn null_map() -> Outcome {
    let start = Instant::now();
    let link = LinkConfig::default();
    let nulls = dispersion_nulls(&link, 36e9);
    let k = 2.0 * link.dispersion * link.length * link.wavelength * link.wavelength;
    let f0 = (nscm::linksim::SPEED_OF_LIGHT / k).sqrt();
    let first_ok = (nulls[0] - f0).abs() < 1.0 && (nulls[0] - 6.06e9).abs() <= 10e6;
    let probe = probe_response_native(&link, 20e9).expect("probe");
    let mut dips = Vec::new();
    for &f in &nulls[..3] {
        let near = |lo: f64, hi: f64| {
            probe
                .freqs
                .iter()
                .zip(&probe.response_db)
                .filter(|(g, _)| (**g - f).abs() >= lo && (**g - f).abs() <= hi)
                .map(|(_, &r)| r)
                .collect::<Vec<f64>>()
        };
        let floor = near(0.0, 100e6).into_iter().fold(f64::INFINITY, f64::min);
        let shoulder = near(0.5e9, 1.0e9).into_iter().fold(f64::NEG_INFINITY, f64::max);
        dips.push(shoulder - floor);
    }
    let dips_ok = dips.iter().all(|&d| d >= 25.0);
    let secs = start.elapsed().as_secs_f64();
    check(
        nulls.len() == 15 && first_ok && dips_ok && secs < 60.0,
        format!(
            "{} nulls <= 36 GHz (want 15), first {:.4} GHz, probe dips {:.1}/{:.1}/{:.1} dB, {secs:.1} s",
            nulls.len(),
            nulls[0] / 1e9,
            dips[0],
            dips[1],
            dips[2]
        ),
    )
}

struct Flagship {
    json: String,
    csv: String,
}

fn flagship_run() -> (Outcome, Flagship, f64) {
    let cfg = flagship();
    let plan = cfg.plan.resolve(&cfg.link).expect("plan");
    let pcs = plan.bands.iter().filter(|b| matches!(b.modulation, Modulation::Pcs64qam { .. })).count();
    let bpsk = plan.bands.iter().filter(|b| b.modulation == Modulation::Bpsk).count();
    let net = plan_rate(&plan, cfg.fec_overhead, cfg.tx.matcher).expect("rate").net;
    let start = Instant::now();
    let (report, artifacts) = run_experiment(&cfg, cfg.seed, RunOptions::default()).expect("flagship run");
    let secs = start.elapsed().as_secs_f64();
    let a = &report.aggregate;
    let pass = plan.bands.len() == 16
        && pcs == 13
        && bpsk == 3
        && net >= 100e9
        && cfg.tx.clipping_db == 8.0
        && cfg.link.length == 100e3
        && cfg.tx.symbols_per_band == 200_000
        && a.ber < 1e-2
        && a.ngmi > NGMI_SD_FEC
        && a.capacity_reach >= 10e12
        && secs < 600.0;
    let out = check(
        pass,
        format!(
            "{} bands ({pcs} PCS + {bpsk} BPSK), net {:.2} Gb/s, BER {:.2e}, NGMI {:.4}, {:.2} Tb/s*km, {secs:.0} s",
            plan.bands.len(),
            a.net_rate / 1e9,
            a.ber,
            a.ngmi,
            a.capacity_reach / 1e12
        ),
    );
    let files = Flagship {
        json: report.to_json().expect("json"),
        csv: report.to_csv(),
    };
    (out, files, artifacts.papr_db)
}

fn mean_by_value(cells: &[SweepCell], f: impl Fn(&nscm::metrics::MetricsReport) -> f64) -> Vec<(f64, f64, f64, usize)> {
    let mut out: Vec<(f64, f64, f64, usize)> = Vec::new();
    for c in cells {
        let Ok(r) = &c.outcome else { continue };
        match out.iter_mut().find(|o| o.0 == c.value) {
            Some(o) => {
                o.1 += f(r);
                o.3 += 1;
            }
            None => out.push((c.value, f(r), c.net_rate, 1)),
        }
    }
    for o in &mut out {
        o.1 /= o.3 as f64;
    }
    out
}

fn clipping(papr_db: f64) -> Outcome {
    let values: Vec<f64> = (4..=14).map(f64::from).collect();
    let cells = sweep(&sweep_config(), SweepAxis::Clipping, &values, &[1, 2, 3]).expect("clipping sweep");
    let failed = cells.iter().filter(|c| c.outcome.is_err()).count();
    let ber = mean_by_value(&cells, |r| r.aggregate.ber);
    let (best, min) = ber
        .iter()
        .map(|o| (o.0, o.1))
        .fold((f64::NAN, f64::INFINITY), |acc, (v, b)| if b < acc.1 { (v, b) } else { acc });
    let interior = best > values[0] && best < values[values.len() - 1];
    let pass = failed == 0 && interior && (6.0..=10.0).contains(&best) && (10.0..=16.0).contains(&papr_db);
    let curve: Vec<String> = ber.iter().map(|o| format!("{:.0}:{:.2e}", o.0, o.1)).collect();
    check(
        pass,
        format!(
            "BER minimum {min:.2e} at CR {best:.0} dB, unclipped PAPR {papr_db:.2} dB, {failed} failed cells [{}]",
            curve.join(" ")
        ),
    )
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn trends() -> Outcome {
    let cfg = sweep_config();
    let scales = [0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.2];
    let rate = sweep(&cfg, SweepAxis::Rate, &scales, &[cfg.seed]).expect("rate sweep");
    let mut pts: Vec<(f64, f64)> = rate
        .iter()
        .filter_map(|c| c.outcome.as_ref().ok().map(|r| (c.net_rate, r.aggregate.ngmi)))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let rate_mono = pts.windows(2).all(|w| w[1].1 <= w[0].1);
    let rho = spearman(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), &pts.iter().map(|p| p.1).collect::<Vec<_>>());

    // Thermal noise is fixed, so 6 dB of received optical power moves the
    // electrical SNR by 12 dB.
    let rops = [-8.0, -7.0, -6.0, -5.0, -4.0, -3.0, -2.0];
    let rop = sweep(&cfg, SweepAxis::Rop, &rops, &[cfg.seed]).expect("rop sweep");
    let ngmis: Vec<f64> = rop
        .iter()
        .filter_map(|c| c.outcome.as_ref().ok().map(|r| r.aggregate.ngmi))
        .collect();
    let rop_mono = ngmis.len() == rops.len() && ngmis.windows(2).all(|w| w[1] >= w[0]);
    let pass = pts.len() == scales.len() && rate_mono && rho < -0.9 && rop_mono;
    check(
        pass,
        format!(
            "rate sweep {} points, net {:.1}..{:.1} Gb/s, NGMI {:.4}..{:.4}, monotone {rate_mono}, Spearman {rho:.3}; \
             ROP -8..-2 dBm NGMI {:.4}..{:.4}, monotone {rop_mono}",
            pts.len(),
            pts[0].0 / 1e9,
            pts[pts.len() - 1].0 / 1e9,
            pts[0].1,
            pts[pts.len() - 1].1,
            ngmis.first().copied().unwrap_or(f64::NAN),
            ngmis.last().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn psk8() -> Constellation {
    let pts = (0..8)
        .map(|k| Complex64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_4))
        .collect();
    Constellation::new(pts, (0..8).collect(), vec![0.125; 8]).unwrap()
}

fn path_cost(z: &[Complex64], seq: &[usize], c: &Constellation, alpha: f64, sigma2: f64, init: Option<Complex64>) -> f64 {
    let pts = c.points();
    let mut prev = init.unwrap_or(Complex64::new(0.0, 0.0));
    let mut total = 0.0;
    for (k, &i) in seq.iter().enumerate() {
        total += (z[k] - pts[i] - alpha * prev).norm_sqr() / (2.0 * sigma2) - c.priors()[i].ln();
        prev = pts[i];
    }
    total
}

fn exhaustive(z: &[Complex64], c: &Constellation, alpha: f64, sigma2: f64, init: Option<Complex64>) -> f64 {
    let m = c.len();
    let mut seq = vec![0; z.len()];
    let mut best = f64::INFINITY;
    for code in 0..m.pow(z.len() as u32) {
        let mut r = code;
        for s in seq.iter_mut() {
            *s = r % m;
            r /= m;
        }
        best = best.min(path_cost(z, &seq, c, alpha, sigma2, init));
    }
    best
}

fn oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mlse_bad = 0;
    for case in 0..100 {
        let (base, max_len) = match case % 3 {
            0 => (Constellation::bpsk(), 8),
            1 => (Constellation::qpsk(), 7),
            _ => (psk8(), 5),
        };
        let mut p: Vec<f64> = (0..base.len()).map(|_| rng.gen_range(0.2..1.0)).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        let c = base.with_priors(p).unwrap();
        let len = rng.gen_range(1..=max_len);
        let alpha = rng.gen_range(-0.9..0.9);
        let sigma2: f64 = rng.gen_range(0.02..0.5);
        let init = (case % 2 == 0).then(|| c.points()[rng.gen_range(0..c.len())]);
        let z: Vec<Complex64> = (0..len)
            .map(|_| {
                let a = c.points()[rng.gen_range(0..c.len())];
                let nr: f64 = rng.sample(StandardNormal);
                let ni: f64 = rng.sample(StandardNormal);
                a + sigma2.sqrt() * Complex64::new(nr, ni)
            })
            .collect();
        let out = mlse_viterbi(&z, &TrellisSpec::new(c.clone(), alpha).unwrap(), sigma2, true, init).unwrap();
        let best = exhaustive(&z, &c, alpha, sigma2, init);
        let own = path_cost(&z, &out.indices, &c, alpha, sigma2, init);
        if (own - best).abs() > 1e-9 * best.abs().max(1.0) {
            mlse_bad += 1;
        }
    }

    let mut ccdm_bad = 0;
    for counts in [vec![2, 2], vec![3, 1], vec![2, 1, 1], vec![1, 1, 1, 1], vec![4, 0]] {
        let comp = Composition::new(counts.clone()).unwrap();
        let k = comp.num_bits() as usize;
        let mut words = Vec::new();
        for v in 0..1usize << k {
            let bits: Vec<u8> = (0..k).map(|j| ((v >> (k - 1 - j)) & 1) as u8).collect();
            let s = ccdm_encode(&bits, &comp).unwrap();
            let exact = counts.iter().enumerate().all(|(i, &c)| s.iter().filter(|&&x| x == i).count() as u64 == c);
            if !exact || ccdm_decode(&s, &comp).unwrap() != bits {
                ccdm_bad += 1;
            }
            words.push(s);
        }
        words.sort();
        words.dedup();
        if words.len() != 1 << k {
            ccdm_bad += 1;
        }
    }
    let big = Ccdm::new(Composition::from_priors(pcs_qam(6, 4.5).unwrap().priors(), 1000).unwrap());
    for _ in 0..1000 {
        let bits = random_bits(&mut rng, big.num_bits());
        let s = big.encode(&bits).unwrap();
        let mut counts = vec![0u64; 64];
        s.iter().for_each(|&x| counts[x] += 1);
        if counts != big.composition().counts() || big.decode(&s).unwrap() != bits {
            ccdm_bad += 1;
        }
    }

    let c = pcs_qam(6, 4.0).unwrap();
    let sigma2: f64 = 0.01;
    let noise = Normal::new(0.0, sigma2.sqrt()).unwrap();
    let rx: Vec<Complex64> = (0..1000)
        .map(|_| c.points()[rng.gen_range(0..64)] + Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng)))
        .collect();
    let d = demap_llr(&rx, &c, sigma2, true).unwrap();
    let metric = |r: &Complex64, i: usize| c.priors()[i].ln() - (r - c.points()[i]).norm_sqr() / (2.0 * sigma2);
    let demap_bad = rx
        .iter()
        .zip(&d.hard)
        .filter(|(r, &h)| (0..64).any(|i| metric(r, i) > metric(r, h)))
        .count();
    check(
        mlse_bad == 0 && ccdm_bad == 0 && demap_bad == 0,
        format!("MLSE {mlse_bad}/100 mismatches, CCDM {ccdm_bad} failures, demap {demap_bad}/1000 mismatches"),
    )
}

fn shaping_stats() -> Outcome {
    let lat = qam64_lattice();
    let priors = mb_distribution(&lat, mb_fit_entropy(&lat, 4.5).unwrap().nu).unwrap();
    let ccdm = Ccdm::new(Composition::from_priors(&priors, 1000).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut hist = vec![0u64; 64];
    for _ in 0..10_000 {
        let s = ccdm.encode(&random_bits(&mut rng, ccdm.num_bits())).unwrap();
        s.iter().for_each(|&x| hist[x] += 1);
    }
    let total = hist.iter().sum::<u64>() as f64;
    let tv = hist.iter().zip(&priors).map(|(&h, p)| (h as f64 / total - p).abs()).sum::<f64>() / 2.0;

    let mut worst_rate = f64::INFINITY;
    let mut worst_fit: f64 = 0.0;
    let mut rate_fail = Vec::new();
    for k in 0..=6 {
        let h = 3.0 + 0.5 * k as f64;
        let fit = mb_fit_entropy(&lat, h).unwrap();
        let p = mb_distribution(&lat, fit.nu).unwrap();
        worst_fit = worst_fit.max((entropy(&p) - h).abs());
        let comp = Composition::from_priors(&p, 1000).unwrap();
        let margin = comp.num_bits() as f64 / 1000.0 - (h - 0.1);
        worst_rate = worst_rate.min(margin);
        if margin < 0.0 {
            rate_fail.push(format!("{h:.1}"));
        }
    }
    check(
        tv <= 0.01 && worst_rate >= 0.0 && worst_fit <= 1e-6,
        format!(
            "TV {tv:.4} over 1e4 blocks, k/n - (H - 0.1) min {worst_rate:.3} bits (short at H = {}), MB fit error {worst_fit:.1e}",
            if rate_fail.is_empty() { "none".to_string() } else { rate_fail.join(", ") }
        ),
    )
}

fn metric_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = Constellation::square_qam(6).unwrap();
    let tx: Vec<usize> = (0..20_000).map(|_| rng.gen_range(0..64)).collect();
    let noiseless = gmi_estimate(&tx, &c.map(&tx).unwrap(), &c).unwrap().gmi;

    let b = Constellation::bpsk();
    let sigma = (0.5f64).sqrt();
    let n = Normal::new(0.0, sigma).unwrap();
    let tx: Vec<usize> = (0..200_000).map(|_| rng.gen_range(0..2)).collect();
    let rx: Vec<Complex64> = b
        .map(&tx)
        .unwrap()
        .into_iter()
        .map(|x| x + Complex64::new(n.sample(&mut rng), n.sample(&mut rng)))
        .collect();
    let bpsk = gmi_estimate(&tx, &rx, &b).unwrap().gmi;
    // Binary-input AWGN capacity at Es/N0 = 0 dB by trapezoid quadrature.
    let s2 = sigma * sigma;
    let (lo, hi, steps) = (1.0 - 12.0 * sigma, 1.0 + 12.0 * sigma, 20_000);
    let dy = (hi - lo) / steps as f64;
    let mut loss = 0.0;
    for k in 0..=steps {
        let y = lo + k as f64 * dy;
        let pdf = (-(y - 1.0f64).powi(2) / (2.0 * s2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        loss += w * pdf * (1.0 + (-2.0 * y / s2).exp()).log2();
    }
    let oracle = 1.0 - loss * dy;

    let hd = ngmi(6.0 - 6.0 * (1.0 - NGMI_HD_FEC), 6.0, 6).unwrap();
    let sd = ngmi(4.5 - 6.0 * (1.0 - NGMI_SD_FEC), 4.5, 6).unwrap();
    let bpsk_sd = ngmi(1.0 - (1.0 - NGMI_SD_FEC), 1.0, 1).unwrap();
    let arith = (hd - 0.9346).abs() < 1e-12 && (sd - 0.858).abs() < 1e-12 && (bpsk_sd - 0.858).abs() < 1e-12;
    check(
        noiseless >= 5.99 && (bpsk - oracle).abs() < 0.02 && arith,
        format!(
            "noiseless 64QAM GMI {noiseless:.4}, BPSK 0 dB GMI {bpsk:.4} vs oracle {oracle:.4}, NGMI {hd:.4}/{sd:.4}/{bpsk_sd:.4}"
        ),
    )
}

fn determinism(first: &Flagship) -> Outcome {
    let cfg = flagship();
    let (report, _) = run_experiment(&cfg, cfg.seed, RunOptions::default()).expect("second flagship run");
    let same = report.to_json().expect("json") == first.json && report.to_csv() == first.csv;

    let base = transmission(&cfg, cfg.seed).expect("transmission");
    let mut more = cfg.clone();
    let mean = base.plan.bands.iter().map(|b| b.baud).sum::<f64>() / base.plan.bands.len() as f64;
    more.plan.bands.push(BandSpec {
        center: 35.5e9,
        baud: (mean / 10e6).round() * 10e6,
        rolloff: 0.1,
        modulation: Modulation::Bpsk,
        power_scale: 1.0,
        excluded: false,
    });
    let ext = transmission(&more, cfg.seed).expect("17-band transmission");
    let changed = (0..base.frames.len())
        .filter(|&i| {
            let (a, b) = (base.frames[i].as_ref().unwrap(), ext.frames[i].as_ref().unwrap());
            a.label_bits() != b.label_bits() || a.data_bits != b.data_bits || a.preamble != b.preamble
        })
        .count();
    check(
        same && changed == 0,
        format!(
            "repeat run byte-identical: {same} ({} B JSON, {} B CSV); 17th band changed {changed} of 16 bands' bits",
            first.json.len(),
            first.csv.len()
        ),
    )
}

fn report(n: usize, name: &str, o: &Outcome, failures: &mut usize) {
    if !o.pass {
        *failures += 1;
    }
    println!("criterion {n} {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn main() {
    // `cargo test -- --list` and filters from the test harness do not apply.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut failures = 0;
    report(1, "null map", &null_map(), &mut failures);
    let (flag, files, papr) = flagship_run();
    report(2, "flagship replica", &flag, &mut failures);
    report(3, "clipping sweep", &clipping(papr), &mut failures);
    report(4, "rate and ROP trends", &trends(), &mut failures);
    report(5, "oracle equivalences", &oracles(), &mut failures);
    report(6, "shaping statistics", &shaping_stats(), &mut failures);
    report(7, "metric sanity", &metric_sanity(), &mut failures);
    report(8, "determinism", &determinism(&files), &mut failures);
    println!("acceptance: {} of 8 criteria pass", 8 - failures);
    if failures > 0 && std::env::var("NSCM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
