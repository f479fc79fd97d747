use std::f64::consts::LN_2;

use cmspress::boundary::{check_lemmas, CompactifiedShift};
use cmspress::gallery::{instantiate, instantiate_with, GalleryParams, OracleSource, CATALOGUE};
use cmspress::io::GalleryBundle;
use cmspress::potential::Potential;
use cmspress::pressure::{interior_pressure, sft_pressure};
use cmspress::sectors::{decompose, verify};
use cmspress::shift::{truncate, LoopCounts, TruncatedSFT, VertexId};

#[test]
fn every_entry_passes_its_lemmas() {
    for name in CATALOGUE {
        let g = instantiate(name).unwrap();
        let cert = verify(&decompose(&g.spec, &g.metric, &g.cutoffs, g.n_max).unwrap());
        for n in [16, 64, 256] {
            let cs = CompactifiedShift::new(truncate(&g.spec, n), g.boundary.clone()).unwrap();
            let r = check_lemmas(&cs, cert.is_sectorial()).unwrap();
            assert!(r.passed, "{name} at N={n}: {r:?}");
        }
    }
}

#[test]
fn verdicts_agree_with_oracles() {
    for name in CATALOGUE {
        let g = instantiate(name).unwrap();
        let Some(o) = &g.oracles.sectorial else { continue };
        let cert = verify(&decompose(&g.spec, &g.metric, &g.cutoffs, g.n_max).unwrap());
        assert_eq!(cert.is_sectorial(), o.value, "{name}: {cert:?}");
    }
}

#[test]
fn entropy_oracles_match_interior_pressure() {
    for name in CATALOGUE {
        let g = instantiate(name).unwrap();
        let Some(o) = &g.oracles.entropy else { continue };
        let schedule: Vec<u64> = match name {
            "dyadic_tree" => vec![63, 255, 1023],
            "loop_system" | "circle_loops" => vec![64, 256, 1024],
            _ => vec![32, 64, 128],
        };
        let p = interior_pressure(&g.spec, &Potential::zero(), &schedule).unwrap().value;
        // truncations approach from below; the tridiagonal entries lose
        // O(1/N^2), the tree and loops a finite number of levels
        let tol = match name {
            "random_walk_1side" | "birth_death_parity" => 1e-3,
            "dyadic_tree" | "loop_system" => 2e-2,
            _ => 1e-9,
        };
        assert!(p <= o.value + 1e-9 && o.value - p < tol, "{name}: {p} vs {}", o.value);
    }
}

#[test]
fn birth_death_pairs_are_full_two_shifts() {
    let g = instantiate("birth_death_parity").unwrap();
    assert_eq!(g.oracles.interior_rich.as_ref().unwrap().source, OracleSource::Stated);
    for n in 1..=64 {
        let t = TruncatedSFT::induced(&g.spec, &[VertexId::from_index(n), VertexId::from_index(n + 1)]);
        assert_eq!(t.edge_count(), 4, "n = {n}");
        let p = sft_pressure(&t, &Potential::zero()).unwrap().value;
        assert!((p - LN_2).abs() < 1e-12, "n = {n}: {p}");
    }
}

#[test]
fn bundles_reimport_equal() {
    for name in CATALOGUE {
        let g = instantiate(name).unwrap();
        let text = serde_json::to_string(&GalleryBundle::from_entry(&g)).unwrap();
        let back: GalleryBundle = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_entry().unwrap(), g);
    }
    let p = GalleryParams {
        counts: Some(LoopCounts::Constant { value: 3 }),
        radii: Some(vec![0.5, 0.75, 0.875]),
    };
    let g = instantiate_with("circle_loops", &p).unwrap();
    let text = serde_json::to_string(&GalleryBundle::from_entry(&g)).unwrap();
    assert_eq!(serde_json::from_str::<GalleryBundle>(&text).unwrap().to_entry().unwrap(), g);
}
