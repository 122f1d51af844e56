//! XML-native OLAP warehouse engine.
//!
//! A warehouse is a directory of XML documents: `dw-model.xml` describing
//! dimensions and fact classes, one document per dimension holding its
//! members, and one document per fact class holding the facts. The crate
//! loads such a warehouse ([`store`]), evaluates OLAP pipelines over it by
//! lowering them to a tree algebra ([`tax`], [`algebra`]), compiles the same
//! pipelines to XQuery for external processors ([`codegen`]), and renders
//! results ([`present`]).
//!
//! The numeric paths are generic over [`MeasureValue`]. The aliases below fix
//! the default exact decimal instantiation; the `*F64` aliases use binary
//! floating point.

pub mod algebra;
pub mod codegen;
pub mod diagnostic;
pub mod model;
pub mod number;
pub mod present;
pub mod sample;
pub mod store;
pub mod tax;
mod xml;

pub use rust_decimal::Decimal;

pub use diagnostic::Diagnostic;
pub use number::MeasureValue;

/// Default measure type: exact scaled decimal.
pub type Number = Decimal;

pub type Instance = store::WarehouseInstance<Number>;
pub type Fact = store::FactRecord<Number>;
pub type View = algebra::CubeView<Number>;
pub type Pivot = present::PivotTable<Number>;

pub type InstanceF64 = store::WarehouseInstance<f64>;
pub type ViewF64 = algebra::CubeView<f64>;
pub type PivotF64 = present::PivotTable<f64>;
