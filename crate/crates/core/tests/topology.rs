use kickrotor::dynamics::ProtocolSpec;
use kickrotor::floquet::band_grid;
use kickrotor::topology::{analyze, flux_signs, patch_euler_class, zak_loops, Direction, PatchSpec};
use kickrotor::{BandField, Convention, KAlphaGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn fig3(beta: f64, n: usize) -> BandField {
    band_grid(3, KAlphaGrid::new(n, n).unwrap(), &ProtocolSpec::fig3_family(beta, 40, 1), &Convention::default()).unwrap()
}

fn gap1_patch(grid: &KAlphaGrid) -> PatchSpec {
    PatchSpec::from_coords([-0.8 * PI, 0.8 * PI], [-0.2 * PI, 0.4 * PI], 1, grid).unwrap()
}

#[test]
fn braid_sequence() {
    let expect = [(0.15, vec![2, 0, 0], Some(0)), (0.21, vec![2, 2, 0], None), (0.3, vec![2, 2, 0], Some(1))];
    for (beta, counts, chi) in expect {
        let field = fig3(beta, 100);
        let (rep, _) = analyze(&field, &[]).unwrap();
        assert_eq!(rep.node_counts, counts, "β = {beta}");
        if let Some(chi) = chi {
            let r = patch_euler_class(&gap1_patch(&field.grid), &field).unwrap();
            assert_eq!(r.chi.abs(), chi, "β = {beta}");
            assert!((r.chi_raw - r.chi as f64).abs() < 1e-2);
            assert_eq!(r.nodes_inside, 2);
        }
    }
}

#[test]
fn euler_class_survives_random_resigns() {
    let field = fig3(0.3, 100);
    let patch = gap1_patch(&field.grid);
    let base = patch_euler_class(&patch, &field).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let mut f = field.clone();
        for fr in f.frames.iter_mut() {
            for b in 0..3 {
                if rng.gen_bool(0.5) {
                    fr.frame.column_mut(b).neg_mut();
                }
            }
        }
        let r = patch_euler_class(&patch, &f).unwrap();
        assert_eq!(r.chi, base.chi);
        assert!((r.chi_raw - base.chi_raw).abs() < 1e-9);
    }
}

#[test]
fn euler_class_refines_stably() {
    let coarse = fig3(0.3, 100);
    let fine = fig3(0.3, 200);
    let a = patch_euler_class(&gap1_patch(&coarse.grid), &coarse).unwrap();
    let b = patch_euler_class(&gap1_patch(&fine.grid), &fine).unwrap();
    assert_eq!(a.chi, b.chi);
    assert!((a.chi_raw - b.chi_raw).abs() < 1e-3, "{} vs {}", a.chi_raw, b.chi_raw);
}

#[test]
fn zak_phase_counts_string_crossings() {
    for beta in [0.15, 0.3] {
        let field = fig3(beta, 64);
        let (_, fixed) = analyze(&field, &[]).unwrap();
        let mut checked = 0;
        for dir in [Direction::K, Direction::Alpha] {
            for (x, (z, ok)) in zak_loops(&field, dir).unwrap().into_iter().enumerate() {
                if ok.is_err() {
                    continue;
                }
                let (t, b) = ((x / 3) as isize, z.band - 1);
                let parity = match dir {
                    Direction::K => fixed.crossings.k_loop_parity(b, t),
                    Direction::Alpha => fixed.crossings.alpha_loop_parity(b, t),
                };
                assert_eq!(z.phase, PI * parity as f64, "β = {beta}, {dir:?} loop {t}, band {}", z.band);
                checked += 1;
            }
        }
        assert!(checked > 300);
    }
}

#[test]
fn node_counts_even_and_flux_balanced() {
    for beta in [0.1, 0.15, 0.21, 0.25, 0.3] {
        let field = fig3(beta, 48);
        for b in 0..3 {
            let prod: i64 = flux_signs(&field, b).iter().map(|&s| s as i64).product();
            assert_eq!(prod, 1, "β = {beta}, band {b}");
        }
        if let Ok((rep, _)) = analyze(&field, &[]) {
            assert!(rep.node_counts.iter().all(|c| c % 2 == 0), "β = {beta}: {:?}", rep.node_counts);
        }
    }
}

#[test]
fn circle_protocol_is_gapped() {
    let field = band_grid(3, KAlphaGrid::new(48, 48).unwrap(), &ProtocolSpec::fig1_circle(40, 1), &Convention::default()).unwrap();
    let (rep, _) = analyze(&field, &[]).unwrap();
    assert_eq!(rep.node_counts, vec![0, 0, 0]);
    assert!(rep.zak.iter().all(|z| z.phase == 0.0 || z.phase == PI));
}
