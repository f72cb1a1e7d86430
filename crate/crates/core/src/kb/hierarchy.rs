use indexmap::IndexMap;

use super::KbError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Node {
    parent: Option<String>,
    children: Vec<String>,
    instances: Vec<String>,
}

/// Class tree whose leaves are object instances.
///
/// Classes that directly hold instances are primary classes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObjectHierarchy {
    nodes: IndexMap<String, Node>,
}

/// An edit to the hierarchy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HierarchyEdit {
    AddInstance { instance: String, class: String },
    RemoveInstance { instance: String },
    /// Folds `absorbed` into `keep`; both must share a parent.
    MergeClasses { keep: String, absorbed: String },
}

impl ObjectHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the tree from `subclass(child, parent)` and `is(object, class)` pairs.
    pub fn from_pairs<'a>(
        subclass: impl IntoIterator<Item = (&'a str, &'a str)>,
        is: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, KbError> {
        let mut h = ObjectHierarchy::new();
        for (child, parent) in subclass {
            h.add_subclass(child, parent)?;
        }
        for (obj, class) in is {
            h.ensure(class);
            h.add_instance(obj, class)?;
        }
        h.validate()?;
        Ok(h)
    }

    fn ensure(&mut self, class: &str) {
        self.nodes.entry(class.to_string()).or_default();
    }

    pub fn add_subclass(&mut self, child: &str, parent: &str) -> Result<(), KbError> {
        self.ensure(parent);
        self.ensure(child);
        let node = &self.nodes[child];
        match &node.parent {
            Some(p) if p == parent => return Ok(()),
            Some(p) => {
                return Err(KbError::Hierarchy(format!(
                    "class {child} has two parents: {p} and {parent}"
                )))
            }
            None => {}
        }
        let mut cur = Some(parent.to_string());
        while let Some(c) = cur {
            if c == child {
                return Err(KbError::Hierarchy(format!(
                    "subclass({child}, {parent}) creates a cycle"
                )));
            }
            cur = self.nodes[&c].parent.clone();
        }
        self.nodes[child].parent = Some(parent.to_string());
        self.nodes[parent].children.push(child.to_string());
        Ok(())
    }

    fn validate(&self) -> Result<(), KbError> {
        let roots: Vec<&String> = self
            .nodes
            .iter()
            .filter(|(_, n)| n.parent.is_none())
            .map(|(k, _)| k)
            .collect();
        if roots.len() > 1 {
            return Err(KbError::Hierarchy(format!(
                "hierarchy has several roots: {}",
                roots.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            )));
        }
        Ok(())
    }

    pub fn root(&self) -> Option<&str> {
        self.nodes
            .iter()
            .find(|(_, n)| n.parent.is_none())
            .map(|(k, _)| k.as_str())
    }

    pub fn contains_class(&self, class: &str) -> bool {
        self.nodes.contains_key(class)
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    pub fn parent(&self, class: &str) -> Option<&str> {
        self.nodes.get(class)?.parent.as_deref()
    }

    pub fn children(&self, class: &str) -> &[String] {
        self.nodes.get(class).map_or(&[], |n| &n.children)
    }

    pub fn instances(&self, class: &str) -> &[String] {
        self.nodes.get(class).map_or(&[], |n| &n.instances)
    }

    pub fn count_class_instances(&self, class: &str) -> usize {
        self.instances(class).len()
    }

    /// Classes holding instances, plus childless classes.
    pub fn primary_classes(&self) -> impl Iterator<Item = &str> {
        self.nodes
            .iter()
            .filter(|(_, n)| !n.instances.is_empty() || n.children.is_empty())
            .map(|(k, _)| k.as_str())
    }

    pub fn class_of(&self, instance: &str) -> Option<&str> {
        self.nodes
            .iter()
            .find(|(_, n)| n.instances.iter().any(|i| i == instance))
            .map(|(k, _)| k.as_str())
    }

    fn ancestors(&self, class: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = self.nodes.get_key_value(class).map(|(k, _)| k.as_str());
        while let Some(c) = cur {
            out.push(c);
            cur = self.nodes[c].parent.as_deref();
        }
        out
    }

    /// Height of the lowest common ancestor above `primary_class` and the
    /// sibling counts along the path to it.
    ///
    /// `widths[0]` is always 1; `widths[h-1]` for h ≥ 2 counts the path node
    /// at height h together with its siblings.
    pub fn lca_path(
        &self,
        target_class: &str,
        primary_class: &str,
    ) -> Result<(usize, Vec<usize>), KbError> {
        for c in [target_class, primary_class] {
            if !self.contains_class(c) {
                return Err(KbError::UnknownClass(c.to_string()));
            }
        }
        let target_anc = self.ancestors(target_class);
        let path = self.ancestors(primary_class);
        let lca_idx = path
            .iter()
            .position(|c| target_anc.contains(c))
            .ok_or_else(|| {
                KbError::Hierarchy(format!(
                    "{target_class} and {primary_class} share no ancestor"
                ))
            })?;
        let height = lca_idx.max(1);
        let mut widths = vec![1];
        for node in path.iter().take(height + 1).skip(2) {
            widths.push(self.children(node).len().max(1));
        }
        Ok((height, widths))
    }

    pub fn add_instance(&mut self, instance: &str, class: &str) -> Result<(), KbError> {
        if !self.contains_class(class) {
            return Err(KbError::UnknownClass(class.to_string()));
        }
        if let Some(existing) = self.class_of(instance) {
            if existing == class {
                return Ok(());
            }
            return Err(KbError::Hierarchy(format!(
                "{instance} already belongs to {existing}"
            )));
        }
        self.nodes[class].instances.push(instance.to_string());
        Ok(())
    }

    /// Removes an instance; its class stays in the tree even when emptied.
    pub fn remove_instance(&mut self, instance: &str) -> Result<(), KbError> {
        let class = self
            .class_of(instance)
            .ok_or_else(|| KbError::UnknownInstance(instance.to_string()))?
            .to_string();
        self.nodes[&class].instances.retain(|i| i != instance);
        Ok(())
    }

    pub fn merge_classes(&mut self, keep: &str, absorbed: &str) -> Result<(), KbError> {
        for c in [keep, absorbed] {
            if !self.contains_class(c) {
                return Err(KbError::UnknownClass(c.to_string()));
            }
        }
        if keep == absorbed {
            return Ok(());
        }
        let (pk, pa) = (self.parent(keep), self.parent(absorbed));
        if pk != pa {
            return Err(KbError::MergeParents {
                keep: keep.to_string(),
                absorbed: absorbed.to_string(),
            });
        }
        let gone = self.nodes.shift_remove(absorbed).expect("checked above");
        if let Some(p) = &gone.parent {
            self.nodes[p].children.retain(|c| c != absorbed);
        }
        for child in &gone.children {
            self.nodes[child].parent = Some(keep.to_string());
        }
        let node = &mut self.nodes[keep];
        node.children.extend(gone.children);
        node.instances.extend(gone.instances);
        Ok(())
    }

    pub fn revise(&mut self, edit: &HierarchyEdit) -> Result<(), KbError> {
        match edit {
            HierarchyEdit::AddInstance { instance, class } => self.add_instance(instance, class),
            HierarchyEdit::RemoveInstance { instance } => self.remove_instance(instance),
            HierarchyEdit::MergeClasses { keep, absorbed } => self.merge_classes(keep, absorbed),
        }
    }
}
