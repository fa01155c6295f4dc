//! Scenario files shipped with the binary.

pub struct Preset {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal) => {
        Preset {
            name: $name,
            text: include_str!(concat!("../presets/", $name, ".toml")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("dimer"),
    preset!("detuned-dimer"),
    preset!("seven-site-chain"),
    preset!("fmo-like"),
    preset!("complex-i-like"),
    preset!("chain41-crossover"),
    preset!("holstein-dimer"),
    preset!("disordered-ring"),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
