//! Regenerates the committed files under `fixtures/` from the built-in
//! examples: `cargo run -p lamhat --example regen_fixtures`.

use std::fs;
use std::path::Path;

use lamhat::fixtures;
use lamhat::json::derivation_to_json;

fn main() -> std::io::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    fs::create_dir_all(&root)?;

    let sigma = serde_json::to_string_pretty(&derivation_to_json(&fixtures::sigma()))
        .expect("derivation values serialize");
    fs::write(root.join("sigma.json"), sigma + "\n")?;

    for (name, src, _) in fixtures::all_terms() {
        let file = format!("{}.lamhat", name.replace('-', "_"));
        fs::write(root.join(file), format!("{src}\n"))?;
    }

    fs::write(root.join("beta_identity.cbn"), "(\\x.x) (\\y.y)\n")?;
    fs::write(root.join("beta_identity.cbv"), "(\\x.x) (\\y.y)\n")?;
    fs::write(root.join("bang_identity.bang"), "(\\x.x) !(\\y.y)\n")?;

    println!("fixtures regenerated under {}", root.display());
    Ok(())
}
