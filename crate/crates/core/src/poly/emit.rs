use std::fmt::Write;

use super::{ParamSystem, Term};

impl ParamSystem {
    /// Canonical text form, accepted by [`super::parse_system`]. Coefficients
    /// are written with shortest round-trip formatting so parsing the output
    /// reproduces the system exactly.
    pub fn to_input_text(&self) -> String {
        let mut out = String::new();
        if !self.var_names.is_empty() {
            writeln!(out, "variable {};", self.var_names.join(", ")).unwrap();
        }
        if !self.param_names.is_empty() {
            writeln!(out, "parameter {};", self.param_names.join(", ")).unwrap();
        }
        if !self.function_names.is_empty() {
            writeln!(out, "function {};", self.function_names.join(", ")).unwrap();
        }
        for (name, terms) in self.function_names.iter().zip(&self.functions) {
            write!(out, "{name} = ").unwrap();
            if terms.is_empty() {
                out.push('0');
            }
            for (k, t) in terms.iter().enumerate() {
                if k > 0 {
                    out.push_str(" + ");
                }
                self.write_term(&mut out, t);
            }
            out.push_str(";\n");
        }
        out
    }

    fn write_term(&self, out: &mut String, t: &Term) {
        if t.coeff.im == 0.0 {
            write!(out, "({:?})", t.coeff.re).unwrap();
        } else {
            write!(out, "({:?} + {:?}*I)", t.coeff.re, t.coeff.im).unwrap();
        }
        let factors = self
            .var_names
            .iter()
            .zip(&t.var_exps)
            .chain(self.param_names.iter().zip(&t.param_exps));
        for (name, &e) in factors {
            match e {
                0 => {}
                1 => write!(out, "*{name}").unwrap(),
                _ => write!(out, "*{name}^{e}").unwrap(),
            }
        }
    }
}
