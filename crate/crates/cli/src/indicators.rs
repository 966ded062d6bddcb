use recind_core::{indicators, Path, SemanticsMode};

/// CSV with one row per observation: `index,x1..xd,zeta_<mode>...`.
pub fn indicators_csv(path: &Path, modes: &[SemanticsMode]) -> String {
    let mut out = String::from("index");
    for i in 1..=path.dim() {
        out.push_str(&format!(",x{i}"));
    }
    for m in modes {
        out.push_str(&format!(",zeta_{m}"));
    }
    out.push('\n');
    let columns: Vec<Vec<bool>> = modes.iter().map(|&m| indicators(path, m).bits().to_vec()).collect();
    for (t, obs) in path.iter().enumerate() {
        out.push_str(&(t + 1).to_string());
        for x in obs.coords() {
            out.push_str(&format!(",{x}"));
        }
        for col in &columns {
            out.push_str(if col[t] { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::parse_path;

    #[test]
    fn two_dimensional_example() {
        let p = parse_path("0,0\n10,-5\n1,1\n").unwrap();
        let csv = indicators_csv(&p, &SemanticsMode::ALL);
        assert_eq!(
            csv,
            "index,x1,x2,zeta_chain,zeta_dominance\n1,0,0,1,1\n2,10,-5,0,0\n3,1,1,1,0\n"
        );
    }

    #[test]
    fn ascending_line() {
        let p = parse_path("1\n2\n3\n").unwrap();
        let csv = indicators_csv(&p, &[SemanticsMode::Chain]);
        assert_eq!(csv, "index,x1,zeta_chain\n1,1,1\n2,2,1\n3,3,1\n");
    }
}
