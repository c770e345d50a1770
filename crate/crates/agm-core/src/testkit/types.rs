//! Test-case structure: setup object diagram, sequence-diagram driver,
//! object-pattern + OCL oracle.

use crate::expr::Expr;
use crate::loc::SourceLocation;
use crate::model::Path;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Category {
    Unit,
    Integration,
    Acceptance,
}

impl Category {
    pub fn keyword(self) -> &'static str {
        match self {
            Category::Unit => "unit",
            Category::Integration => "integration",
            Category::Acceptance => "acceptance",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DriverMode {
    Strict,
    Loose,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SetupStmt {
    /// `name = new Class {attr = expr, ...};`
    Create { name: String, class: String, inits: Vec<(String, Expr)>, loc: SourceLocation },
    /// `link owner.role += target;`
    Link { target: Path, value: String, loc: SourceLocation },
}

/// The sender position of an `expect` item. `Tester` stands for the test
/// driver itself, outside the modeled system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SenderRef {
    Tester,
    Binding(String),
}

impl fmt::Display for SenderRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SenderRef::Tester => f.write_str("TESTER"),
            SenderRef::Binding(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DriverItem {
    /// `target.method(args);` — a trigger call issued by the tester.
    Trigger { target: Path, method: String, args: Vec<Expr>, loc: SourceLocation },
    /// `expect sender -> receiver : method(args);` — an expected interaction.
    /// Empty parentheses leave the arguments unconstrained; otherwise the
    /// full argument list must equal the recorded values.
    Expect { sender: SenderRef, receiver: String, method: String, args: Vec<Expr>, loc: SourceLocation },
    /// `check ocl;` — evaluated right after the preceding trigger returns,
    /// or against the freshly instantiated space when no trigger precedes.
    Check { expr: Expr, loc: SourceLocation },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternEntry {
    pub binding: String,
    pub class: String,
    pub constraints: Vec<(String, Expr)>,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternLink {
    pub from: String,
    pub role: String,
    pub to: String,
    pub loc: SourceLocation,
}

/// A deliberately partial description of the expected final object
/// structure. Unconstrained attributes and unmentioned objects are ignored.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ObjectPattern {
    pub entries: Vec<PatternEntry>,
    pub links: Vec<PatternLink>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Oracle {
    pub pattern: Option<ObjectPattern>,
    pub asserts: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestCase {
    pub name: String,
    pub category: Category,
    pub setup: Vec<SetupStmt>,
    /// `None` means the category default applies: acceptance tests match
    /// traces loosely, unit and integration tests strictly.
    pub driver_mode: Option<DriverMode>,
    pub driver: Vec<DriverItem>,
    pub oracle: Oracle,
    pub loc: SourceLocation,
}

impl TestCase {
    pub fn effective_driver_mode(&self) -> DriverMode {
        self.driver_mode.unwrap_or(match self.category {
            Category::Acceptance => DriverMode::Loose,
            Category::Unit | Category::Integration => DriverMode::Strict,
        })
    }

    pub fn setup_names(&self) -> Vec<&str> {
        self.setup
            .iter()
            .filter_map(|s| match s {
                SetupStmt::Create { name, .. } => Some(name.as_str()),
                SetupStmt::Link { .. } => None,
            })
            .collect()
    }

    pub fn strip_locations(&mut self) {
        self.loc = SourceLocation::dummy();
        for stmt in &mut self.setup {
            match stmt {
                SetupStmt::Create { inits, loc, .. } => {
                    inits.iter_mut().for_each(|(_, e)| e.strip_locations());
                    *loc = SourceLocation::dummy();
                }
                SetupStmt::Link { target, loc, .. } => {
                    target.loc = SourceLocation::dummy();
                    *loc = SourceLocation::dummy();
                }
            }
        }
        for item in &mut self.driver {
            match item {
                DriverItem::Trigger { target, args, loc, .. } => {
                    target.loc = SourceLocation::dummy();
                    args.iter_mut().for_each(Expr::strip_locations);
                    *loc = SourceLocation::dummy();
                }
                DriverItem::Expect { args, loc, .. } => {
                    args.iter_mut().for_each(Expr::strip_locations);
                    *loc = SourceLocation::dummy();
                }
                DriverItem::Check { expr, loc } => {
                    expr.strip_locations();
                    *loc = SourceLocation::dummy();
                }
            }
        }
        if let Some(pattern) = &mut self.oracle.pattern {
            for entry in &mut pattern.entries {
                entry.constraints.iter_mut().for_each(|(_, e)| e.strip_locations());
                entry.loc = SourceLocation::dummy();
            }
            for link in &mut pattern.links {
                link.loc = SourceLocation::dummy();
            }
        }
        self.oracle.asserts.iter_mut().for_each(Expr::strip_locations);
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TestSuite {
    pub tests: Vec<TestCase>,
}

impl TestSuite {
    pub fn test(&self, name: &str) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.name == name)
    }

    pub fn strip_locations(&mut self) {
        self.tests.iter_mut().for_each(TestCase::strip_locations);
    }
}
