use std::fmt;
use std::str::FromStr;

use super::script::{EditKind, EditOperation};
use super::tree::name_and_type;
use crate::ast::{split_markers, NodeKind};

macro_rules! change_types {
    ($($variant:ident => $name:literal,)*) => {
        /// Fine-grained change type. The declaration order is the column
        /// order of aggregate outputs.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum ChangeType {
            $($variant,)*
        }

        impl ChangeType {
            pub const ALL: &'static [ChangeType] = &[$(ChangeType::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(ChangeType::$variant => $name,)*
                }
            }
        }
    };
}

change_types! {
    AdditionalClass => "ADDITIONAL_CLASS",
    RemovedClass => "REMOVED_CLASS",
    ClassRenaming => "CLASS_RENAMING",
    AdditionalFunctionality => "ADDITIONAL_FUNCTIONALITY",
    RemovedFunctionality => "REMOVED_FUNCTIONALITY",
    MethodRenaming => "METHOD_RENAMING",
    ParameterInsert => "PARAMETER_INSERT",
    ParameterDelete => "PARAMETER_DELETE",
    ParameterRenaming => "PARAMETER_RENAMING",
    ParameterTypeChange => "PARAMETER_TYPE_CHANGE",
    ParameterOrderingChange => "PARAMETER_ORDERING_CHANGE",
    ReturnTypeChange => "RETURN_TYPE_CHANGE",
    AdditionalObjectState => "ADDITIONAL_OBJECT_STATE",
    RemovedObjectState => "REMOVED_OBJECT_STATE",
    AttributeTypeChange => "ATTRIBUTE_TYPE_CHANGE",
    AttributeRenaming => "ATTRIBUTE_RENAMING",
    StatementInsert => "STATEMENT_INSERT",
    StatementDelete => "STATEMENT_DELETE",
    StatementUpdate => "STATEMENT_UPDATE",
    StatementOrderingChange => "STATEMENT_ORDERING_CHANGE",
    StatementParentChange => "STATEMENT_PARENT_CHANGE",
    ConditionExpressionChange => "CONDITION_EXPRESSION_CHANGE",
    DocInsert => "DOC_INSERT",
    DocDelete => "DOC_DELETE",
    DocUpdate => "DOC_UPDATE",
    UnclassifiedChange => "UNCLASSIFIED_CHANGE",
}

impl ChangeType {
    /// Position in [`ChangeType::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ChangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown change type `{0}`")]
pub struct UnknownChangeType(pub String);

impl FromStr for ChangeType {
    type Err = UnknownChangeType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChangeType::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownChangeType(s.to_string()))
    }
}

pub fn classify(op: &EditOperation) -> ChangeType {
    use ChangeType::*;
    use EditKind::*;
    use NodeKind as K;

    let old = op.old_label.as_deref().unwrap_or("");
    let new = op.new_label.as_deref().unwrap_or("");
    match (op.node_kind, op.op) {
        (K::Class, Insert) => AdditionalClass,
        (K::Class, Delete) => RemovedClass,
        (K::Class, Update) if split_markers(old).1 != split_markers(new).1 => ClassRenaming,
        (K::Method, Insert) => AdditionalFunctionality,
        (K::Method, Delete) => RemovedFunctionality,
        (K::Method, Update) if split_markers(old).1 != split_markers(new).1 => MethodRenaming,
        (K::Parameter, Insert) => ParameterInsert,
        (K::Parameter, Delete) => ParameterDelete,
        (K::Parameter, Update) => match typed_update(old, new) {
            Some(true) => ParameterRenaming,
            Some(false) => ParameterTypeChange,
            None => UnclassifiedChange,
        },
        (K::Parameter, Move) if op.same_parent() => ParameterOrderingChange,
        (K::ReturnType, Update) => ReturnTypeChange,
        (K::Field, Insert) => AdditionalObjectState,
        (K::Field, Delete) => RemovedObjectState,
        (K::Field, Update) => match typed_update(old, new) {
            Some(true) => AttributeRenaming,
            Some(false) => AttributeTypeChange,
            None => UnclassifiedChange,
        },
        (K::Statement, Insert) => StatementInsert,
        (K::Statement, Delete) => StatementDelete,
        (K::Statement, Update) => StatementUpdate,
        (K::Statement, Move) if op.same_parent() => StatementOrderingChange,
        (K::Statement, Move) => StatementParentChange,
        (K::Condition, Update) => ConditionExpressionChange,
        (K::DocComment, Insert) => DocInsert,
        (K::DocComment, Delete) => DocDelete,
        (K::DocComment, Update) => DocUpdate,
        _ => UnclassifiedChange,
    }
}

/// `Some(true)` if the name part changed, `Some(false)` if only the type
/// changed, `None` if neither did (markers only).
fn typed_update(old: &str, new: &str) -> Option<bool> {
    let (old_name, old_type) = name_and_type(old);
    let (new_name, new_type) = name_and_type(new);
    if old_name != new_name {
        Some(true)
    } else if old_type != new_type {
        Some(false)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::NodeRef;

    fn op(op: EditKind, kind: NodeKind, old: Option<&str>, new: Option<&str>) -> EditOperation {
        EditOperation {
            op,
            node_kind: kind,
            node: NodeRef::Source(3),
            parent: Some(NodeRef::Source(1)),
            position: 0,
            old_label: old.map(str::to_string),
            new_label: new.map(str::to_string),
            old_parent_path: None,
            new_parent_path: None,
            old_index: None,
            new_index: None,
            old_parent: Some(1),
        }
    }

    #[test]
    fn taxonomy_has_26_distinct_labels_in_order() {
        assert_eq!(ChangeType::ALL.len(), 26);
        assert_eq!(ChangeType::ALL[0].name(), "ADDITIONAL_CLASS");
        assert_eq!(ChangeType::ALL[25].name(), "UNCLASSIFIED_CHANGE");
        for (i, c) in ChangeType::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(c.name().parse::<ChangeType>().unwrap(), *c);
        }
        assert!("FOO".parse::<ChangeType>().is_err());
    }

    #[test]
    fn parameter_insert_and_doc_delete() {
        assert_eq!(
            classify(&op(EditKind::Insert, NodeKind::Parameter, None, Some("x:int"))),
            ChangeType::ParameterInsert
        );
        assert_eq!(
            classify(&op(EditKind::Delete, NodeKind::DocComment, Some("docs"), None)),
            ChangeType::DocDelete
        );
    }

    #[test]
    fn typed_updates_split_name_and_type() {
        let c = |kind, a, b| classify(&op(EditKind::Update, kind, Some(a), Some(b)));
        assert_eq!(
            c(NodeKind::Parameter, "x:int", "x:long"),
            ChangeType::ParameterTypeChange
        );
        assert_eq!(c(NodeKind::Parameter, "x:int", "y:int"), ChangeType::ParameterRenaming);
        assert_eq!(c(NodeKind::Parameter, "x:int", "y:long"), ChangeType::ParameterRenaming);
        assert_eq!(c(NodeKind::Field, "f:int", "f:long"), ChangeType::AttributeTypeChange);
        assert_eq!(c(NodeKind::Field, "f:int", "g:int"), ChangeType::AttributeRenaming);
        assert_eq!(
            c(NodeKind::Field, "f:int", "@Inject f:int"),
            ChangeType::UnclassifiedChange
        );
        assert_eq!(c(NodeKind::Method, "m", "n"), ChangeType::MethodRenaming);
        assert_eq!(c(NodeKind::Method, "m", "@Test m"), ChangeType::UnclassifiedChange);
        assert_eq!(c(NodeKind::Class, "A", "B"), ChangeType::ClassRenaming);
        assert_eq!(c(NodeKind::ReturnType, "int", "long"), ChangeType::ReturnTypeChange);
        assert_eq!(c(NodeKind::Condition, "a", "b"), ChangeType::ConditionExpressionChange);
        assert_eq!(c(NodeKind::Body, "", "x"), ChangeType::UnclassifiedChange);
    }

    #[test]
    fn moves_depend_on_parent() {
        let mut same = op(EditKind::Move, NodeKind::Statement, Some("a"), Some("a"));
        assert_eq!(classify(&same), ChangeType::StatementOrderingChange);
        same.node_kind = NodeKind::Parameter;
        assert_eq!(classify(&same), ChangeType::ParameterOrderingChange);
        let mut other = op(EditKind::Move, NodeKind::Statement, Some("a"), Some("a"));
        other.parent = Some(NodeRef::Target(9));
        assert_eq!(classify(&other), ChangeType::StatementParentChange);
        other.node_kind = NodeKind::Method;
        assert_eq!(classify(&other), ChangeType::UnclassifiedChange);
    }
}
