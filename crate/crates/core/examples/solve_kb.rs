//! Solves the stair-climbing default program and queries it.
use asp_pomdp::kb::KnowledgeBase;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut kb = KnowledgeBase::from_text(include_str!("../kb/climb_stairs.kb"))?;
    println!("answer set:\n{}", kb.export_answer_set()?);
    for robot in ["peoplebot", "nao"] {
        let yes = kb.query_text(&format!("clmbstair({robot})"))?;
        let no = kb.query_text(&format!("-clmbstair({robot})"))?;
        let verdict = match (yes.is_empty(), no.is_empty()) {
            (false, _) => "can climb",
            (_, false) => "cannot climb",
            _ => "unknown",
        };
        println!("{robot}: {verdict}");
    }
    Ok(())
}
