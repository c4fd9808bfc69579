//! Drives an external process over the line protocol. The child here is a
//! short Python echo policy; any executable speaking the protocol works.

use agilab::agents::{make_agent, AgentSpec};
use agilab::ecologies::{make_instruction_family, GoalSpec, TaskDistribution};
use agilab::functionals::{estimate_generality, SamplingPlan};
use agilab::interaction::{Budget, InstructionOp};

const POLICY: &str = r#"
import json, sys
for line in sys.stdin:
    msg = json.loads(line)
    if msg["type"] == "observe":
        words = msg["payload"]["value"].split()
        print(json.dumps({"type": "confidence", "value": 1.0}))
        print(json.dumps({"type": "act", "payload": {"type": "say", "value": words[-1]}}), flush=True)
"#;

fn main() -> agilab::Result<()> {
    let family = make_instruction_family(3, 3)?;
    let g = |arg: &str| (GoalSpec::Instruction { op: InstructionOp::Echo, arg: arg.into() }, 1.0);
    let mu = TaskDistribution::from_goals(family, &[g("ab"), g("cab"), g("c")])?;
    let mut spec = AgentSpec::kind("stdio-bridge");
    spec.command = Some(format!("python3 -c '{POLICY}'"));
    spec.timeout_steps = Some(100);
    spec.deterministic = Some(true);
    let agent = make_agent(&spec, &[])?;
    let g = estimate_generality(&mu, &agent, &Budget::ample(), &SamplingPlan::exact(2), 0)?;
    println!("bridged echo policy: G = {}", g.mean);
    Ok(())
}
