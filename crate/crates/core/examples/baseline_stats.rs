//! Quick scheme comparison on a batch of random networks: happiness and
//! per-layer edge consumption for the three routing/coding baselines.

use layercast::baselines::{route_intra_layer, route_pt2pt, route_steiner};
use layercast::netgraph::{GenParams, LayeredDag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = 300;
    // Per scheme and layer: (edges consumed, source out-edges consumed).
    let mut stats = [[(0usize, 0usize); 3]; 3];
    let mut happy = [0usize; 3];
    let mut total_recv = 0usize;
    for _ in 0..trials {
        let g = LayeredDag::generate_random(GenParams::new(25, 9, 3), &mut rng).unwrap();
        let cuts = g.min_cuts_from_source();
        total_recv += g.receivers().len();
        for (i, result) in [route_pt2pt(&g), route_steiner(&g), route_intra_layer(&g)]
            .into_iter()
            .enumerate()
        {
            for (l, layer_edges) in result.edges_used.iter().enumerate() {
                let src = layer_edges
                    .iter()
                    .filter(|&&e| g.edge(e).0 == g.source())
                    .count();
                stats[i][l].0 += layer_edges.len();
                stats[i][l].1 += src;
            }
            happy[i] += result
                .achieved
                .iter()
                .filter(|&&(r, a)| a == cuts[r].min(g.layers()))
                .count();
        }
    }
    for (i, name) in ["pt2pt", "steiner", "intra"].iter().enumerate() {
        print!(
            "{name:8} happy {:5.2}% |",
            100.0 * happy[i] as f64 / total_recv as f64
        );
        for (l, &(edges, src)) in stats[i].iter().enumerate() {
            print!(
                "  L{}: edges {:5.2} src {:4.2}",
                l + 1,
                edges as f64 / trials as f64,
                src as f64 / trials as f64
            );
        }
        println!();
    }
}
