//! Embedded catalog of languages, sign items, performers and recordings.
//!
//! Backed by a single SQLite file. The schema is versioned through
//! `PRAGMA user_version` and migrated forward on open. Rows referenced by
//! other rows cannot be deleted.

use std::path::{Path, PathBuf};

use rusqlite::{params, Connection, ErrorCode, OptionalExtension, Transaction};
use serde::{Serialize, Serializer};
use signcol_core::SignCategory;

use crate::recording::SavedRecording;

pub const DB_FILE_NAME: &str = "signcol.db";
pub const MAX_AGE: u32 = 130;

/// Option keys written by the settings form.
pub const OPTION_OUTPUT_ROOT: &str = "output_root";
pub const OPTION_FRAME_RATE: &str = "frame_rate";

const MIGRATIONS: &[&str] = &[
    // v1
    "CREATE TABLE languages (
         id   INTEGER PRIMARY KEY AUTOINCREMENT,
         name TEXT NOT NULL UNIQUE COLLATE NOCASE
     );
     CREATE TABLE items (
         id          INTEGER PRIMARY KEY AUTOINCREMENT,
         name        TEXT NOT NULL,
         language_id INTEGER NOT NULL REFERENCES languages(id) ON DELETE RESTRICT,
         category    INTEGER NOT NULL CHECK (category BETWEEN 1 AND 8),
         UNIQUE (name, language_id)
     );
     CREATE TABLE performers (
         id    INTEGER PRIMARY KEY AUTOINCREMENT,
         name  TEXT NOT NULL,
         age   INTEGER NOT NULL CHECK (age BETWEEN 1 AND 130),
         phone TEXT NOT NULL
     );
     CREATE TABLE recordings (
         id           INTEGER PRIMARY KEY AUTOINCREMENT,
         folder_path  TEXT NOT NULL UNIQUE,
         performer_id INTEGER NOT NULL REFERENCES performers(id) ON DELETE RESTRICT,
         item_id      INTEGER NOT NULL REFERENCES items(id) ON DELETE RESTRICT,
         frame_count  INTEGER NOT NULL CHECK (frame_count >= 0)
     );
     CREATE INDEX recordings_item ON recordings(item_id);
     CREATE TABLE options (
         key   TEXT PRIMARY KEY,
         value TEXT NOT NULL
     );",
];

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("{0} already exists")]
    Uniqueness(String),
    #[error("{0} does not exist")]
    Reference(String),
    #[error("{0} is still referenced")]
    InUse(String),
    #[error("invalid value: {0}")]
    Validation(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error("database schema version {found} is newer than supported version {supported}")]
    SchemaTooNew { found: i64, supported: i64 },
    #[error(transparent)]
    Sqlite(#[from] rusqlite::Error),
}

pub type Result<T, E = CatalogError> = std::result::Result<T, E>;

fn serialize_category<S: Serializer>(c: &SignCategory, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(c.code())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Language {
    pub id: i64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignItem {
    pub id: i64,
    pub name: String,
    pub language_id: i64,
    #[serde(serialize_with = "serialize_category")]
    pub category: SignCategory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Performer {
    pub id: i64,
    pub name: String,
    pub age: u32,
    pub phone: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordingEntry {
    pub id: i64,
    pub folder_path: String,
    pub performer_id: i64,
    pub item_id: i64,
    pub frame_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CategoryCount {
    #[serde(serialize_with = "serialize_category")]
    pub category: SignCategory,
    pub description: &'static str,
    pub defined_item_count: u64,
    pub recording_count: u64,
}

/// Items and recordings per category, in category order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryStats {
    pub categories: Vec<CategoryCount>,
}

impl CategoryStats {
    pub fn empty() -> Self {
        CategoryStats {
            categories: SignCategory::ALL
                .iter()
                .map(|&category| CategoryCount {
                    category,
                    description: category.description(),
                    defined_item_count: 0,
                    recording_count: 0,
                })
                .collect(),
        }
    }

    pub fn get(&self, category: SignCategory) -> &CategoryCount {
        &self.categories[usize::from(category.number() - 1)]
    }

    fn get_mut(&mut self, category: SignCategory) -> &mut CategoryCount {
        &mut self.categories[usize::from(category.number() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemWithCount {
    #[serde(flatten)]
    pub item: SignItem,
    pub recording_count: u64,
}

/// Every row of every table, in id order; used to compare store contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogSnapshot {
    pub languages: Vec<Language>,
    pub items: Vec<SignItem>,
    pub performers: Vec<Performer>,
    pub recordings: Vec<RecordingEntry>,
    pub options: Vec<(String, String)>,
}

pub struct Catalog {
    conn: Connection,
    path: Option<PathBuf>,
}

fn category_from_db(n: i64) -> rusqlite::Result<SignCategory> {
    u8::try_from(n)
        .ok()
        .and_then(SignCategory::from_number)
        .ok_or(rusqlite::Error::IntegralValueOutOfRange(3, n))
}

fn is_constraint(e: &rusqlite::Error) -> Option<i32> {
    match e {
        rusqlite::Error::SqliteFailure(f, _) if f.code == ErrorCode::ConstraintViolation => {
            Some(f.extended_code)
        }
        _ => None,
    }
}

const SQLITE_CONSTRAINT_FOREIGNKEY: i32 = 787;
const SQLITE_CONSTRAINT_UNIQUE: i32 = 2067;
// ON DELETE RESTRICT reports through the trigger code.
const SQLITE_CONSTRAINT_TRIGGER: i32 = 1811;

impl Catalog {
    /// Opens (creating if needed) the catalog file and migrates it.
    pub fn open(path: &Path) -> Result<Catalog> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| {
                CatalogError::Validation(format!("cannot create {}: {e}", dir.display()))
            })?;
        }
        Self::init(Connection::open(path)?, Some(path.to_path_buf()))
    }

    pub fn open_in_memory() -> Result<Catalog> {
        Self::init(Connection::open_in_memory()?, None)
    }

    fn init(mut conn: Connection, path: Option<PathBuf>) -> Result<Catalog> {
        conn.pragma_update(None, "foreign_keys", true)?;
        if path.is_some() {
            conn.pragma_update(None, "journal_mode", "WAL")?;
            conn.pragma_update(None, "synchronous", "FULL")?;
        }
        let version: i64 = conn.pragma_query_value(None, "user_version", |r| r.get(0))?;
        let supported = MIGRATIONS.len() as i64;
        if version > supported {
            return Err(CatalogError::SchemaTooNew { found: version, supported });
        }
        for (i, sql) in MIGRATIONS.iter().enumerate().skip(version as usize) {
            let tx = conn.transaction()?;
            tx.execute_batch(sql)?;
            tx.pragma_update(None, "user_version", i as i64 + 1)?;
            tx.commit()?;
        }
        Ok(Catalog { conn, path })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn schema_version(&self) -> Result<i64> {
        Ok(self.conn.pragma_query_value(None, "user_version", |r| r.get(0))?)
    }

    pub fn define_language(&mut self, name: &str) -> Result<Language> {
        let name = name.trim();
        if name.is_empty() {
            return Err(CatalogError::Validation("language name must not be empty".into()));
        }
        self.conn
            .execute("INSERT INTO languages (name) VALUES (?1)", [name])
            .map_err(|e| match is_constraint(&e) {
                Some(SQLITE_CONSTRAINT_UNIQUE) => CatalogError::Uniqueness(format!("language {name:?}")),
                _ => e.into(),
            })?;
        Ok(Language { id: self.conn.last_insert_rowid(), name: name.to_string() })
    }

    pub fn define_item(&mut self, name: &str, category: SignCategory, language_id: i64) -> Result<SignItem> {
        let name = name.trim();
        if name.is_empty() {
            return Err(CatalogError::Validation("item name must not be empty".into()));
        }
        let tx = self.conn.transaction()?;
        if !exists(&tx, "languages", language_id)? {
            return Err(CatalogError::Reference(format!("language {language_id}")));
        }
        tx.execute(
            "INSERT INTO items (name, language_id, category) VALUES (?1, ?2, ?3)",
            params![name, language_id, category.number()],
        )
        .map_err(|e| match is_constraint(&e) {
            Some(SQLITE_CONSTRAINT_UNIQUE) => {
                CatalogError::Uniqueness(format!("item {name:?} in language {language_id}"))
            }
            _ => e.into(),
        })?;
        let id = tx.last_insert_rowid();
        tx.commit()?;
        Ok(SignItem { id, name: name.to_string(), language_id, category })
    }

    pub fn define_performer(&mut self, name: &str, age: u32, phone: &str) -> Result<Performer> {
        let name = name.trim();
        if name.is_empty() {
            return Err(CatalogError::Validation("performer name must not be empty".into()));
        }
        if !(1..=MAX_AGE).contains(&age) {
            return Err(CatalogError::Validation(format!("age {age} outside 1..={MAX_AGE}")));
        }
        self.conn.execute(
            "INSERT INTO performers (name, age, phone) VALUES (?1, ?2, ?3)",
            params![name, age, phone],
        )?;
        Ok(Performer {
            id: self.conn.last_insert_rowid(),
            name: name.to_string(),
            age,
            phone: phone.to_string(),
        })
    }

    /// Records a saved session. The caller is responsible for having
    /// validated the folder.
    pub fn register_recording(&mut self, saved: &SavedRecording) -> Result<RecordingEntry> {
        let folder = saved.folder.to_string_lossy().into_owned();
        let frame_count = i64::try_from(saved.frame_count)
            .map_err(|_| CatalogError::Validation("frame count too large".into()))?;
        let tx = self.conn.transaction()?;
        if !exists(&tx, "items", saved.item_id)? {
            return Err(CatalogError::Reference(format!("item {}", saved.item_id)));
        }
        if !exists(&tx, "performers", saved.performer_id)? {
            return Err(CatalogError::Reference(format!("performer {}", saved.performer_id)));
        }
        tx.execute(
            "INSERT INTO recordings (folder_path, performer_id, item_id, frame_count)
             VALUES (?1, ?2, ?3, ?4)",
            params![folder, saved.performer_id, saved.item_id, frame_count],
        )
        .map_err(|e| match is_constraint(&e) {
            Some(SQLITE_CONSTRAINT_UNIQUE) => CatalogError::Uniqueness(format!("recording {folder:?}")),
            _ => e.into(),
        })?;
        let id = tx.last_insert_rowid();
        tx.commit()?;
        Ok(RecordingEntry {
            id,
            folder_path: folder,
            performer_id: saved.performer_id,
            item_id: saved.item_id,
            frame_count: saved.frame_count,
        })
    }

    fn delete(&mut self, table: &str, what: &str, id: i64) -> Result<()> {
        let n = self
            .conn
            .execute(&format!("DELETE FROM {table} WHERE id = ?1"), [id])
            .map_err(|e| match is_constraint(&e) {
                Some(SQLITE_CONSTRAINT_FOREIGNKEY | SQLITE_CONSTRAINT_TRIGGER) => CatalogError::InUse(format!("{what} {id}")),
                _ => e.into(),
            })?;
        if n == 0 {
            return Err(CatalogError::NotFound(format!("{what} {id}")));
        }
        Ok(())
    }

    pub fn delete_language(&mut self, id: i64) -> Result<()> {
        self.delete("languages", "language", id)
    }

    pub fn delete_item(&mut self, id: i64) -> Result<()> {
        self.delete("items", "item", id)
    }

    pub fn delete_performer(&mut self, id: i64) -> Result<()> {
        self.delete("performers", "performer", id)
    }

    pub fn delete_recording(&mut self, id: i64) -> Result<()> {
        self.delete("recordings", "recording", id)
    }

    pub fn language(&self, id: i64) -> Result<Language> {
        self.conn
            .query_row("SELECT id, name FROM languages WHERE id = ?1", [id], |r| {
                Ok(Language { id: r.get(0)?, name: r.get(1)? })
            })
            .optional()?
            .ok_or_else(|| CatalogError::NotFound(format!("language {id}")))
    }

    pub fn item(&self, id: i64) -> Result<SignItem> {
        self.conn
            .query_row("SELECT id, name, language_id, category FROM items WHERE id = ?1", [id], item_row)
            .optional()?
            .ok_or_else(|| CatalogError::NotFound(format!("item {id}")))
    }

    pub fn performer(&self, id: i64) -> Result<Performer> {
        self.conn
            .query_row("SELECT id, name, age, phone FROM performers WHERE id = ?1", [id], performer_row)
            .optional()?
            .ok_or_else(|| CatalogError::NotFound(format!("performer {id}")))
    }

    pub fn languages(&self) -> Result<Vec<Language>> {
        let mut stmt = self.conn.prepare("SELECT id, name FROM languages ORDER BY id")?;
        let rows = stmt.query_map([], |r| Ok(Language { id: r.get(0)?, name: r.get(1)? }))?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    pub fn items(&self) -> Result<Vec<SignItem>> {
        let mut stmt = self.conn.prepare("SELECT id, name, language_id, category FROM items ORDER BY id")?;
        let rows = stmt.query_map([], item_row)?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    pub fn performers(&self) -> Result<Vec<Performer>> {
        let mut stmt = self.conn.prepare("SELECT id, name, age, phone FROM performers ORDER BY id")?;
        let rows = stmt.query_map([], performer_row)?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    pub fn recordings(&self) -> Result<Vec<RecordingEntry>> {
        let mut stmt = self.conn.prepare(
            "SELECT id, folder_path, performer_id, item_id, frame_count FROM recordings ORDER BY id",
        )?;
        let rows = stmt.query_map([], |r| {
            Ok(RecordingEntry {
                id: r.get(0)?,
                folder_path: r.get(1)?,
                performer_id: r.get(2)?,
                item_id: r.get(3)?,
                frame_count: r.get::<_, i64>(4)? as u64,
            })
        })?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    pub fn category_stats(&self) -> Result<CategoryStats> {
        let mut stats = CategoryStats::empty();
        let mut stmt = self.conn.prepare(
            "SELECT i.category, COUNT(*), COALESCE(SUM(c.n), 0)
             FROM items i
             LEFT JOIN (SELECT item_id, COUNT(*) AS n FROM recordings GROUP BY item_id) c
               ON c.item_id = i.id
             GROUP BY i.category",
        )?;
        let rows = stmt.query_map([], |r| {
            Ok((category_from_db(r.get(0)?)?, r.get::<_, i64>(1)?, r.get::<_, i64>(2)?))
        })?;
        for row in rows {
            let (category, items, recordings) = row?;
            let entry = stats.get_mut(category);
            entry.defined_item_count = items as u64;
            entry.recording_count = recordings as u64;
        }
        Ok(stats)
    }

    /// Items of `category` whose name contains `search` (case-insensitive),
    /// with their recording counts, ordered by name.
    pub fn list_items(&self, category: Option<SignCategory>, search: Option<&str>) -> Result<Vec<ItemWithCount>> {
        let mut stmt = self.conn.prepare(
            "SELECT i.id, i.name, i.language_id, i.category,
                    (SELECT COUNT(*) FROM recordings r WHERE r.item_id = i.id)
             FROM items i
             WHERE ?1 IS NULL OR i.category = ?1
             ORDER BY i.name, i.id",
        )?;
        let needle = search.map(str::to_lowercase).filter(|s| !s.is_empty());
        let rows = stmt.query_map([category.map(|c| c.number())], |r| {
            Ok(ItemWithCount { item: item_row(r)?, recording_count: r.get::<_, i64>(4)? as u64 })
        })?;
        let mut out = Vec::new();
        for row in rows {
            let row = row?;
            if needle.as_ref().is_none_or(|n| row.item.name.to_lowercase().contains(n.as_str())) {
                out.push(row);
            }
        }
        Ok(out)
    }

    pub fn set_option(&mut self, key: &str, value: &str) -> Result<()> {
        self.conn.execute(
            "INSERT INTO options (key, value) VALUES (?1, ?2)
             ON CONFLICT(key) DO UPDATE SET value = excluded.value",
            [key, value],
        )?;
        Ok(())
    }

    pub fn option(&self, key: &str) -> Result<Option<String>> {
        Ok(self
            .conn
            .query_row("SELECT value FROM options WHERE key = ?1", [key], |r| r.get(0))
            .optional()?)
    }

    pub fn snapshot(&self) -> Result<CatalogSnapshot> {
        let mut stmt = self.conn.prepare("SELECT key, value FROM options ORDER BY key")?;
        let options = stmt
            .query_map([], |r| Ok((r.get(0)?, r.get(1)?)))?
            .collect::<rusqlite::Result<_>>()?;
        Ok(CatalogSnapshot {
            languages: self.languages()?,
            items: self.items()?,
            performers: self.performers()?,
            recordings: self.recordings()?,
            options,
        })
    }
}

fn exists(tx: &Transaction<'_>, table: &str, id: i64) -> Result<bool> {
    Ok(tx
        .query_row(&format!("SELECT 1 FROM {table} WHERE id = ?1"), [id], |_| Ok(()))
        .optional()?
        .is_some())
}

fn item_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<SignItem> {
    Ok(SignItem {
        id: r.get(0)?,
        name: r.get(1)?,
        language_id: r.get(2)?,
        category: category_from_db(r.get(3)?)?,
    })
}

fn performer_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<Performer> {
    Ok(Performer { id: r.get(0)?, name: r.get(1)?, age: r.get(2)?, phone: r.get(3)? })
}
