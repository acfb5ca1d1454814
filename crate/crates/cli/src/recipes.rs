//! Committed run recipes, one per figure panel group.

/// `(name, config text)`.
pub const RECIPES: &[(&str, &str)] = &[
    ("fig1", include_str!("../recipes/fig1.conf")),
    ("fig2ab", include_str!("../recipes/fig2ab.conf")),
    ("fig2b", include_str!("../recipes/fig2b.conf")),
    ("fig2cd", include_str!("../recipes/fig2cd.conf")),
    ("fig3", include_str!("../recipes/fig3.conf")),
    ("fig4a", include_str!("../recipes/fig4a.conf")),
    ("fig4b", include_str!("../recipes/fig4b.conf")),
    ("fig5", include_str!("../recipes/fig5.conf")),
    ("fig6", include_str!("../recipes/fig6.conf")),
    ("fig7", include_str!("../recipes/fig7.conf")),
    ("fig8", include_str!("../recipes/fig8.conf")),
];

pub fn find(name: &str) -> Option<&'static str> {
    RECIPES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::settings::Settings;
    use crate::Config;

    #[test]
    fn every_recipe_resolves() {
        for (name, text) in RECIPES {
            let cfg = Config::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            Settings::from_config(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
