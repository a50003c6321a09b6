//! Universes, coverings, query sets and the covering text format.
//!
//! ```text
//! # comment
//! objects: x1 x2 x3 x4
//! element C1: x1 x4
//! element C2: x1 x2 x4
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::boolmat::BoolMatrix;
use crate::error::{Error, Result, ValidationReport};

pub(crate) fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(':') || name.chars().any(char::is_whitespace) {
        return Err(Error::InvalidName(name.to_string()));
    }
    Ok(())
}

/// Strips a trailing `#` comment and surrounding whitespace.
pub(crate) fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    /// Member object indices, ascending.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoveringViolation {
    EmptyElement(String),
    Uncovered(String),
}

impl fmt::Display for CoveringViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoveringViolation::EmptyElement(e) => write!(f, "empty element {e}"),
            CoveringViolation::Uncovered(x) => write!(f, "{x} uncovered"),
        }
    }
}

/// A finite universe with an ordered family of named subsets.
///
/// Object and element order is declaration order and only ever grows at the
/// end, so matrix indices stay stable across updates.
#[derive(Debug, Clone)]
pub struct CoveringSpace {
    objects: Vec<String>,
    object_index: HashMap<String, usize>,
    elements: Vec<Element>,
    element_index: HashMap<String, usize>,
}

impl PartialEq for CoveringSpace {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects && self.elements == other.elements
    }
}

impl Eq for CoveringSpace {}

impl CoveringSpace {
    /// Builds a space from names. Checks name syntax, uniqueness and that
    /// every member is a declared object; the covering property itself is
    /// checked by [`CoveringSpace::validate`].
    pub fn new<S: AsRef<str>>(objects: &[S], elements: &[(S, Vec<S>)]) -> Result<Self> {
        let mut space = Self::with_objects(objects.iter().map(|s| s.as_ref().to_string()).collect())?;
        for (name, members) in elements {
            let members = members
                .iter()
                .map(|m| space.object_id(m.as_ref()))
                .collect::<Result<Vec<_>>>()?;
            space.push_element(name.as_ref().to_string(), members)?;
        }
        Ok(space)
    }

    pub(crate) fn with_objects(objects: Vec<String>) -> Result<Self> {
        let mut object_index = HashMap::with_capacity(objects.len());
        for (i, o) in objects.iter().enumerate() {
            check_name(o)?;
            if object_index.insert(o.clone(), i).is_some() {
                return Err(Error::DuplicateName(o.clone()));
            }
        }
        Ok(Self {
            objects,
            object_index,
            elements: Vec::new(),
            element_index: HashMap::new(),
        })
    }

    pub(crate) fn push_object(&mut self, name: String) -> Result<()> {
        check_name(&name)?;
        if self.object_index.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        self.object_index.insert(name.clone(), self.objects.len());
        self.objects.push(name);
        Ok(())
    }

    pub(crate) fn push_element(&mut self, name: String, mut members: Vec<usize>) -> Result<()> {
        check_name(&name)?;
        if self.element_index.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        members.sort_unstable();
        members.dedup();
        assert!(members.last().is_none_or(|&m| m < self.objects.len()));
        self.element_index.insert(name.clone(), self.elements.len());
        self.elements.push(Element { name, members });
        Ok(())
    }

    pub(crate) fn extend_element(&mut self, element: usize, extra: &[usize]) {
        let members = &mut self.elements[element].members;
        members.extend_from_slice(extra);
        members.sort_unstable();
        members.dedup();
    }

    /// Parses the covering text format. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut space: Option<CoveringSpace> = None;
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last_line = line_no;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "expected `objects:` or `element NAME:`"))?;
            let mut head_words = head.split_whitespace();
            let keyword = head_words.next().unwrap_or("");
            match (keyword, space.as_mut()) {
                ("objects", None) => {
                    if head_words.next().is_some() {
                        return Err(Error::parse(line_no, "unexpected token before `:`"));
                    }
                    let objects = rest.split_whitespace().map(str::to_string).collect();
                    space = Some(Self::with_objects(objects).map_err(|e| Error::parse(line_no, e.to_string()))?);
                }
                ("objects", Some(_)) => {
                    return Err(Error::parse(line_no, "duplicate `objects:` line"));
                }
                ("element", Some(space)) => {
                    let name = match (head_words.next(), head_words.next()) {
                        (Some(name), None) => name,
                        _ => return Err(Error::parse(line_no, "expected `element NAME: members`")),
                    };
                    let members = rest
                        .split_whitespace()
                        .map(|m| space.object_id(m))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| Error::parse(line_no, e.to_string()))?;
                    space
                        .push_element(name.to_string(), members)
                        .map_err(|e| Error::parse(line_no, e.to_string()))?;
                }
                (_, None) => {
                    return Err(Error::parse(line_no, "the first statement must be an `objects:` line"));
                }
                (other, Some(_)) => {
                    return Err(Error::parse(line_no, format!("unknown statement `{other}`")));
                }
            }
        }
        space.ok_or_else(|| Error::parse(last_line.max(1), "missing `objects:` line"))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("objects: {}\n", self.objects.join(" "));
        for e in &self.elements {
            out.push_str(&format!("element {}:", e.name));
            for &m in &e.members {
                out.push(' ');
                out.push_str(&self.objects[m]);
            }
            out.push('\n');
        }
        out
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn object_id(&self, name: &str) -> Result<usize> {
        self.object_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub fn element_id(&self, name: &str) -> Result<usize> {
        self.element_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.object_index.contains_key(name)
    }

    pub fn has_element(&self, name: &str) -> bool {
        self.element_index.contains_key(name)
    }

    /// Checks that no element is empty and that the elements cover the universe.
    pub fn validate(&self) -> ValidationReport<CoveringViolation> {
        let mut violations: Vec<_> = self
            .elements
            .iter()
            .filter(|e| e.members.is_empty())
            .map(|e| CoveringViolation::EmptyElement(e.name.clone()))
            .collect();
        let mut covered = vec![false; self.objects.len()];
        for e in &self.elements {
            for &m in &e.members {
                covered[m] = true;
            }
        }
        violations.extend(
            covered
                .iter()
                .zip(&self.objects)
                .filter(|(c, _)| !**c)
                .map(|(_, x)| CoveringViolation::Uncovered(x.clone())),
        );
        ValidationReport::new(violations)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidCovering(report))
        }
    }

    /// The `n × m` matrix with entry `(i, j) = 1` iff object `i` is in element `j`.
    pub fn matrix_rep(&self) -> Result<BoolMatrix> {
        self.ensure_valid()?;
        Ok(self.membership_matrix())
    }

    pub(crate) fn membership_matrix(&self) -> BoolMatrix {
        let mut m = BoolMatrix::zeros(self.objects.len(), self.elements.len());
        for (j, e) in self.elements.iter().enumerate() {
            for &i in &e.members {
                m.set(i, j, true);
            }
        }
        m
    }

    /// The transpose of the matrix representation: one bit row per element.
    pub(crate) fn element_rows(&self) -> BoolMatrix {
        let mut m = BoolMatrix::zeros(self.elements.len(), self.objects.len());
        for (j, e) in self.elements.iter().enumerate() {
            for &i in &e.members {
                m.set(j, i, true);
            }
        }
        m
    }

    /// The `n × 1` characteristic vector of `query`.
    pub fn char_vector(&self, query: &QuerySet) -> Result<BoolMatrix> {
        let mut v = BoolMatrix::zeros(self.objects.len(), 1);
        for i in query.resolve(self)? {
            v.set(i, 0, true);
        }
        Ok(v)
    }

    /// Intersection of every element containing `object`.
    pub fn neighborhood(&self, object: &str) -> Result<Vec<String>> {
        let x = self.object_id(object)?;
        Ok(self
            .neighborhood_of(x)
            .into_iter()
            .map(|i| self.objects[i].clone())
            .collect())
    }

    pub(crate) fn neighborhood_of(&self, x: usize) -> BTreeSet<usize> {
        let mut acc: Option<BTreeSet<usize>> = None;
        for e in self.elements.iter().filter(|e| e.members.binary_search(&x).is_ok()) {
            let set: BTreeSet<usize> = e.members.iter().copied().collect();
            acc = Some(match acc {
                None => set,
                Some(a) => a.intersection(&set).copied().collect(),
            });
        }
        acc.unwrap_or_default()
    }

    pub fn names_of(&self, ids: impl IntoIterator<Item = usize>) -> Vec<String> {
        ids.into_iter().map(|i| self.objects[i].clone()).collect()
    }
}

/// A subset of a universe, named by object names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuerySet {
    members: BTreeSet<String>,
}

impl QuerySet {
    pub fn new<S: Into<String>>(members: impl IntoIterator<Item = S>) -> Self {
        Self {
            members: members.into_iter().map(Into::into).collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The whole universe of `space`.
    pub fn universe(space: &CoveringSpace) -> Self {
        Self::new(space.objects().iter().cloned())
    }

    /// Parses a comma-separated list; blanks are ignored.
    pub fn parse_list(list: &str) -> Self {
        Self::new(list.split(',').map(str::trim).filter(|s| !s.is_empty()))
    }

    pub fn from_ids(space: &CoveringSpace, ids: impl IntoIterator<Item = usize>) -> Self {
        Self::new(space.names_of(ids))
    }

    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Object indices of the members, ascending.
    pub fn resolve(&self, space: &CoveringSpace) -> Result<Vec<usize>> {
        let mut ids = self
            .members
            .iter()
            .map(|m| space.object_id(m))
            .collect::<Result<Vec<_>>>()?;
        ids.sort_unstable();
        Ok(ids)
    }
}
