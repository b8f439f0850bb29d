//! Branch profiles over a twice-punctured torus and their rigidity verdicts.

use sft_lab::covers::{double_point_budget, double_point_budget_via_adjunction, double_point_budget_via_branching, enumerate_branch_profiles, super_rigidity_verdict, total_branching};

fn main() {
    for d in 2..=3 {
        for bp in enumerate_branch_profiles(d, 0, 2, 3) {
            let r = super_rigidity_verdict(&bp);
            let agree = double_point_budget(&bp) == double_point_budget_via_branching(&bp) && double_point_budget(&bp) == double_point_budget_via_adjunction(&bp);
            println!(
                "degree {d}, interior {}, multiplicities {:?}: branching {}, budget {}, {:?}{}",
                bp.interior_vanishing,
                bp.puncture_multiplicities,
                total_branching(&bp),
                r.budget,
                r.verdict,
                if agree { "" } else { " (budget forms disagree)" }
            );
        }
    }
}
