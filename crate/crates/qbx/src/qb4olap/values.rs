//! Conversions between model scalars and RDF literals.

use crate::error::{Error, Result};
use crate::model::value::{AttrValue, Num, ScalarType};
use crate::rdf::term::{Literal, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER};

/// A number as an RDF literal. Integers become `xsd:integer`; decimals
/// become `xsd:decimal` (with a forced fraction digit so they stay decimal
/// on re-read), falling back to `xsd:double` when only exponent notation
/// can express the value.
pub(crate) fn num_to_literal(n: Num) -> Literal {
    match n {
        Num::Int(i) => Literal::typed(i.to_string(), XSD_INTEGER),
        Num::Dec(d) => {
            let mut text = d.to_string();
            if text.contains(['e', 'E']) || !d.is_finite() {
                return Literal::typed(text, XSD_DOUBLE);
            }
            if !text.contains('.') {
                text.push_str(".0");
            }
            Literal::typed(text, XSD_DECIMAL)
        }
    }
}

/// A number from an RDF literal. Accepts plain literals and any numeric
/// XSD type; integer-valued lexical forms stay exact.
pub(crate) fn literal_to_num(l: &Literal) -> Result<Num> {
    let v = l.value.trim();
    if let Ok(i) = v.parse::<i64>() {
        return Ok(Num::Int(i));
    }
    if let Ok(d) = v.parse::<f64>() {
        return Ok(Num::Dec(d));
    }
    Err(Error::TypeMismatch {
        detail: format!("`{}` is not a numeric value", l.value),
    })
}

pub(crate) fn attr_to_literal(v: &AttrValue) -> Literal {
    match v {
        AttrValue::Str(s) => Literal::str(s.clone()),
        AttrValue::Num(n) => num_to_literal(*n),
    }
}

/// An attribute value from a literal, coerced to the attribute's declared
/// type; the literal's own datatype is not trusted beyond its lexical form.
pub(crate) fn literal_to_attr(decl: ScalarType, l: &Literal) -> Result<AttrValue> {
    match decl {
        ScalarType::String => Ok(AttrValue::Str(l.value.clone())),
        ScalarType::Integer | ScalarType::Decimal => literal_to_num(l).map(AttrValue::Num),
    }
}
