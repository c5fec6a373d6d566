//! Scoring an estimated causal graph against the ground truth.
//!
//! Run with: `cargo run --example graph_metrics`
//!
//! Walks through the metric toolbox on a small worked scenario: structural
//! Hamming distance with its breakdown, structural intervention distance
//! (exact, reference oracle, and best/worst bounds over a Markov
//! equivalence class), orientation precision/recall, and the combined
//! normalized report used by the benchmark harness.

use causal_aba::eval::{
    precision_recall_f1, shd, sid_cpdag, sid_dag, sid_dag_naive, MetricsReport, DEFAULT_MEC_CAP,
};
use causal_aba::graph::Dag;

fn main() {
    // Ground truth: a diamond with a confounded sink.
    //
    //       0
    //      / \
    //     v   v
    //     1   2
    //      \ /
    //       v
    //       3 <- 4
    let truth = Dag::new(5, [(0, 1), (0, 2), (1, 3), (2, 3), (4, 3)]).unwrap();
    println!("truth edges:        {:?}", truth.edges());

    // A plausible estimate: one edge reversed, one missing, one invented.
    let est = Dag::new(5, [(0, 1), (2, 0), (1, 3), (2, 3), (1, 4)]).unwrap();
    println!("estimate edges:     {:?}\n", est.edges());

    // --- Structural Hamming distance -----------------------------------
    // Compared on CPDAGs, so each graph is judged only on what its
    // equivalence class pins down.
    let t_c = truth.to_cpdag();
    let e_c = est.to_cpdag();
    let b = shd(&t_c, &e_c).unwrap();
    println!("SHD = {} (extra {}, missing {}, mis-oriented {})", b.shd, b.extra, b.missing, b.reversed);

    // --- Structural intervention distance -------------------------------
    // Counts ordered pairs (i, j) whose causal effect would be mis-estimated
    // when adjustment sets are read off the estimate while the truth
    // generates the data.
    let s = sid_dag(&truth, &est).unwrap();
    let s_oracle = sid_dag_naive(&truth, &est).unwrap();
    println!("SID = {s} (path-enumeration reference agrees: {s_oracle})");

    // Undirected edges leave the intervention distance ambiguous, so a
    // partially directed estimate gets best/worst bounds over its class.
    let (low, high) = sid_cpdag(&truth, &e_c, DEFAULT_MEC_CAP).unwrap();
    println!("SID over the estimate's equivalence class: best {low}, worst {high}");

    // --- Orientation precision / recall ---------------------------------
    let prf = precision_recall_f1(&t_c, &e_c).unwrap();
    println!(
        "precision {:.3}  recall {:.3}  F1 {:.3}   (TP {}, FP {}, FN {})",
        prf.precision, prf.recall, prf.f1,
        prf.true_positives, prf.false_positives, prf.false_negatives
    );

    // --- The combined report --------------------------------------------
    // Normalized values divide by the true edge count, so they can exceed 1
    // when spurious edges pile up.
    let report = MetricsReport::compute(&truth, &e_c, DEFAULT_MEC_CAP).unwrap();
    println!("\nnormalized: NSHD {:.3}, NSID {:.3}..{:.3}", report.nshd, report.nsid_low, report.nsid_high);
    println!("\nbenchmark row:\n{}", report.to_json_row("demo", 0, "abapc", 0.042));

    // A perfect estimate drives everything to the floor.
    let perfect = MetricsReport::compute(&truth, &truth.to_cpdag(), DEFAULT_MEC_CAP).unwrap();
    println!(
        "\nperfect estimate: SHD {}, SID {}..{}, F1 {:.1}",
        perfect.shd, perfect.sid_low, perfect.sid_high, perfect.f1
    );
}
