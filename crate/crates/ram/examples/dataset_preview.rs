//! Writes preview grids of the three digit tasks (centered, translated,
//! cluttered translated) as PPM files, one generated test instance per cell.

use ram::datasets::{Task, TaskSpec};
use ram::viz::render_task_preview;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data_dir = std::env::var("RAM_DATA_DIR").unwrap_or_else(|_| "data".into());
    let dir = std::path::Path::new(&data_dir);
    for (name, spec) in [
        ("centered_preview.ppm", TaskSpec::centered()),
        ("translated60_preview.ppm", TaskSpec::translated(60)),
        ("cluttered60_preview.ppm", TaskSpec::cluttered(60, 4)),
        ("cluttered100_preview.ppm", TaskSpec::cluttered(100, 8)),
    ] {
        let task = Task::load(spec, dir)?;
        render_task_preview(&task, 6, 6).write_ppm(std::path::Path::new(name))?;
        println!("wrote {name}");
    }
    Ok(())
}
