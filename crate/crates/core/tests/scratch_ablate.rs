use hops_core::datagen::{default_grasp_priors, generate_dataset, generate_library, GenerateConfig};
use hops_core::pipeline::{run_ablation, AblateOptions};
use hops_core::symmetry::ALL_CATEGORIES;

#[test]
fn ablation_prototype() {
    let t0 = std::time::Instant::now();
    let library = generate_library(20, 0).unwrap();
    let priors = default_grasp_priors(&library).unwrap();
    println!("library+priors: {:?}", t0.elapsed());

    let t1 = std::time::Instant::now();
    let records = generate_dataset(&library, &priors, &GenerateConfig::new(500, 0)).unwrap();
    println!("dataset ({} records): {:?}", records.len(), t1.elapsed());

    let t2 = std::time::Instant::now();
    let mut opts = AblateOptions::new(0);
    opts.workers = 4;
    let report = run_ablation(&records, &library, &opts).unwrap();
    println!("ablation: {:?}", t2.elapsed());
    for c in ALL_CATEGORIES {
        for case in ["no_hand", "hand", "hand_refined"] {
            if let Some(row) = report.value(c, case) {
                println!(
                    "{c:7} {case:12} orient_mae {:7.2}  sym_add_auc {:.4}  pos_mae {:5.2}",
                    row.orientation_mae, row.sym_add_auc, row.position_mae
                );
            }
        }
    }
}
