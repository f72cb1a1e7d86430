//! A human report contradicts stored knowledge; the KB keeps the stronger source.
use asp_pomdp::kb::{located, AssertOutcome, Confidence, FactMeta, KbError, KnowledgeBase};

const OFFICE: &str = "
step(1..3).
room(lab). room(office). room(kitchen).
object(printer1). class(printer). is(printer1, printer).
holds(exists(C,R),I) :- holds(in(O,R),I), is(O,C).
-holds(in(O,R2),I) :- holds(in(O,R1),I), R1 != R2.
holds(in(O,R),I+1) :- holds(in(O,R),I), not -holds(in(O,R),I+1).
";

fn report(kb: &mut KnowledgeBase, label: &str) -> Result<(), KbError> {
    let at: Vec<String> = kb
        .query_text("holds(in(printer1, R), 3)")?
        .iter()
        .map(|a| a.to_string())
        .collect();
    println!("{label}: {}", at.join(", "));
    Ok(())
}

fn tell(kb: &mut KnowledgeBase, room: &str, meta: FactMeta) -> Result<(), KbError> {
    if let AssertOutcome::Repaired(records) = kb.assert_fact(located("printer1", room, 2), meta)? {
        for r in records {
            println!("  kept {} over {}", r.kept, r.rejected);
        }
    }
    report(kb, &format!("{:?}/{:?} says {room}", meta.provenance, meta.confidence))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut kb = KnowledgeBase::from_text(OFFICE)?;
    tell(&mut kb, "lab", FactMeta::initial())?;
    // Precedence: human, then confident sensor, then weak sensor, then initial.
    tell(&mut kb, "kitchen", FactMeta::sensor(Confidence::High, 2))?;
    tell(&mut kb, "office", FactMeta::sensor(Confidence::Low, 2))?;
    tell(&mut kb, "office", FactMeta::human(2))?;
    let demoted: Vec<String> = kb.demoted().iter().map(|(l, _)| l.to_string()).collect();
    println!("demoted along the way: {}", demoted.join(", "));
    Ok(())
}
