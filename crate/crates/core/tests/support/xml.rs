use quick_xml::events::Event;
use quick_xml::Reader;

/// Single `<speak>` root, balanced tags, valid escapes.
pub fn check_well_formed(ssml: &str) -> Result<(), String> {
    let mut reader = Reader::from_str(ssml);
    reader.config_mut().check_end_names = true;
    let mut depth = 0i32;
    let mut roots = 0;
    loop {
        match reader.read_event().map_err(|e| e.to_string())? {
            Event::Start(e) => {
                if depth == 0 {
                    roots += 1;
                    if e.name().as_ref() != b"speak" {
                        return Err("root is not <speak>".into());
                    }
                }
                depth += 1;
            }
            Event::End(_) => depth -= 1,
            Event::Text(t) => {
                t.unescape().map_err(|e| e.to_string())?;
                if depth == 0 {
                    return Err("text outside root".into());
                }
            }
            Event::Eof => break,
            Event::Empty(_) if depth == 0 => return Err("empty root".into()),
            _ => {}
        }
    }
    if depth != 0 || roots != 1 {
        return Err(format!("depth {depth}, roots {roots}"));
    }
    Ok(())
}
