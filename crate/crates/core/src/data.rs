//! Dataset loading for the Iris and credit-card fraud experiments.
//!
//! Record ids are 1-based row numbers in file order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chc::{TestSample, TrainingSet};
use crate::error::{Error, Result};

const BUNDLED_IRIS: &str = include_str!("../data/iris.csv");

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "ACAE_DATA_DIR";
pub const CREDITCARD_FILE: &str = "creditcard.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: u64,
    pub features: Vec<f64>,
    pub class_label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    records: Vec<Record>,
    index: HashMap<u64, usize>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, records: Vec<Record>) -> Result<Self> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.features.len() != feature_names.len() {
                return Err(Error::Data(format!(
                    "record {} has {} features, expected {}",
                    r.id,
                    r.features.len(),
                    feature_names.len()
                )));
            }
            if index.insert(r.id, i).is_some() {
                return Err(Error::Data(format!("duplicate id {}", r.id)));
            }
        }
        Ok(Self { feature_names, records, index })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Record> {
        self.index.get(&id).map(|&i| &self.records[i])
    }

    /// All requested records, or an error listing every missing id.
    pub fn require(&self, ids: &[u64]) -> Result<Vec<&Record>> {
        let missing: Vec<String> = ids.iter().filter(|id| self.get(**id).is_none()).map(u64::to_string).collect();
        if !missing.is_empty() {
            return Err(Error::Data(format!("ids not found: {}", missing.join(", "))));
        }
        Ok(ids.iter().map(|id| self.get(*id).expect("checked")).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Setosa,
    Versicolor,
    Virginica,
}

impl Species {
    pub fn name(self) -> &'static str {
        match self {
            Species::Setosa => "setosa",
            Species::Versicolor => "versicolor",
            Species::Virginica => "virginica",
        }
    }

    /// Id of the first record of this species in the standard file.
    fn first_id(self) -> u64 {
        match self {
            Species::Setosa => 1,
            Species::Versicolor => 51,
            Species::Virginica => 101,
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().trim_start_matches("iris-") {
            "setosa" => Ok(Species::Setosa),
            "versicolor" => Ok(Species::Versicolor),
            "virginica" => Ok(Species::Virginica),
            _ => Err(Error::Data(format!("unknown species `{s}`"))),
        }
    }
}

/// `plus` samples get label +1, `minus` samples -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeciesPair {
    pub plus: Species,
    pub minus: Species,
}

impl fmt::Display for SpeciesPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.plus, self.minus)
    }
}

impl FromStr for SpeciesPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("species pair must look like `setosa:versicolor`, got `{s}`")))?;
        let pair = SpeciesPair { plus: a.parse()?, minus: b.parse()? };
        if pair.plus == pair.minus {
            return Err(Error::InvalidArgument(format!("species pair `{s}` repeats a species")));
        }
        Ok(pair)
    }
}

/// Training and test ids. Training ids of each species are paired in the
/// order given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrisSplit {
    pub train_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
}

impl IrisSplit {
    /// The first four records of each species train, the next four test.
    pub fn default_for(pair: SpeciesPair) -> Self {
        let block = |s: Species, skip: u64| (0..4).map(move |k| s.first_id() + skip + k);
        Self {
            train_ids: block(pair.plus, 0).chain(block(pair.minus, 0)).collect(),
            test_ids: block(pair.plus, 4).chain(block(pair.minus, 4)).collect(),
        }
    }
}

fn leakage_guard(train: &[u64], test: &[u64]) -> Result<()> {
    let train: BTreeSet<_> = train.iter().collect();
    let shared: Vec<String> = test.iter().filter(|id| train.contains(id)).map(|id| id.to_string()).collect();
    if !shared.is_empty() {
        return Err(Error::InvalidArgument(format!("ids used for both training and testing: {}", shared.join(", "))));
    }
    Ok(())
}

pub fn parse_iris<R: Read>(reader: R) -> Result<Dataset> {
    #[derive(Deserialize)]
    struct Row {
        id: u64,
        sepal_length: f64,
        sepal_width: f64,
        petal_length: f64,
        petal_width: f64,
        species: String,
    }
    let mut records = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let r: Row = row?;
        let species: Species = r.species.parse()?;
        records.push(Record {
            id: r.id,
            features: vec![r.sepal_length, r.sepal_width, r.petal_length, r.petal_width],
            class_label: species.name().to_string(),
        });
    }
    let names = ["sepal_length", "sepal_width", "petal_length", "petal_width"];
    Dataset::new(names.iter().map(|s| s.to_string()).collect(), records)
}

/// The 150-record Iris table shipped with the crate.
pub fn bundled_iris() -> Dataset {
    parse_iris(BUNDLED_IRIS.as_bytes()).expect("bundled iris data is valid")
}

pub fn read_iris(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    parse_iris(file)
}

/// Training set and test samples for a species pair. `path = None` uses the
/// bundled table.
pub fn load_iris(path: Option<&Path>, pair: SpeciesPair, split: &IrisSplit) -> Result<(TrainingSet, Vec<TestSample>)> {
    let data = match path {
        Some(p) => read_iris(p)?,
        None => bundled_iris(),
    };
    iris_problem(&data, pair, split)
}

pub fn iris_problem(data: &Dataset, pair: SpeciesPair, split: &IrisSplit) -> Result<(TrainingSet, Vec<TestSample>)> {
    leakage_guard(&split.train_ids, &split.test_ids)?;
    let label_of = |r: &Record| -> Result<i8> {
        let s: Species = r.class_label.parse()?;
        if s == pair.plus {
            Ok(1)
        } else if s == pair.minus {
            Ok(-1)
        } else {
            Err(Error::Data(format!("id {} is {}, not part of {pair}", r.id, s)))
        }
    };
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    for r in data.require(&split.train_ids)? {
        match label_of(r)? {
            1 => plus.push(r.features.clone()),
            _ => minus.push(r.features.clone()),
        }
    }
    let train = TrainingSet::uniform(plus, minus)?;
    let tests = data
        .require(&split.test_ids)?
        .into_iter()
        .map(|r| {
            Ok(TestSample { id: r.id, class_label: r.class_label.clone(), features: r.features.clone(), label: label_of(r)? })
        })
        .collect::<Result<_>>()?;
    Ok((train, tests))
}

/// Row selection for the fraud experiment. Normal transactions are the +1
/// class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreditCardSplit {
    pub features: Vec<String>,
    pub normal_train_ids: Vec<u64>,
    pub fraud_train_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
}

impl Default for CreditCardSplit {
    fn default() -> Self {
        Self {
            features: ["V1", "V2", "V3", "V4"].iter().map(|s| s.to_string()).collect(),
            normal_train_ids: vec![1, 2, 3, 4],
            fraud_train_ids: vec![542, 624, 4921, 6109],
            test_ids: vec![5, 6, 7, 8, 6330, 6332, 6335, 6337],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditCardData {
    pub train: TrainingSet,
    pub tests: Vec<TestSample>,
    pub total_rows: u64,
    pub fraud_rows: u64,
}

const CLASS_NORMAL: &str = "normal";
const CLASS_FRAUD: &str = "fraud";

/// Streams the Kaggle credit-card CSV and keeps only the requested rows.
/// Training rows must carry the class they are used for.
pub fn load_creditcard<R: Read>(reader: R, split: &CreditCardSplit) -> Result<CreditCardData> {
    let train_ids: Vec<u64> = split.normal_train_ids.iter().chain(&split.fraud_train_ids).copied().collect();
    leakage_guard(&train_ids, &split.test_ids)?;
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Data(format!("missing column `{name}`")))
    };
    for required in ["Time", "Amount", "Class"] {
        col(required)?;
    }
    let class_col = col("Class")?;
    let feature_cols = split.features.iter().map(|f| col(f)).collect::<Result<Vec<_>>>()?;

    let wanted: BTreeSet<u64> = train_ids.iter().chain(&split.test_ids).copied().collect();
    let mut rows: HashMap<u64, (Vec<f64>, bool)> = HashMap::new();
    let (mut total_rows, mut fraud_rows) = (0u64, 0u64);
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        total_rows += 1;
        let id = total_rows;
        let fraud = match record.get(class_col).map(str::trim) {
            Some("0") => false,
            Some("1") => true,
            other => return Err(Error::Data(format!("row {id}: invalid Class value {other:?}"))),
        };
        fraud_rows += fraud as u64;
        if wanted.contains(&id) {
            let features = feature_cols
                .iter()
                .map(|&c| {
                    record
                        .get(c)
                        .and_then(|v| v.trim().parse::<f64>().ok())
                        .ok_or_else(|| Error::Data(format!("row {id}: bad value in column {}", headers[c].trim())))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.insert(id, (features, fraud));
        }
    }
    let missing: Vec<String> = wanted.iter().filter(|id| !rows.contains_key(id)).map(u64::to_string).collect();
    if !missing.is_empty() {
        return Err(Error::Data(format!("ids not found: {}", missing.join(", "))));
    }

    let take = |ids: &[u64], fraud: bool| -> Result<Vec<Vec<f64>>> {
        ids.iter()
            .map(|id| {
                let (f, is_fraud) = &rows[id];
                if *is_fraud != fraud {
                    let want = if fraud { CLASS_FRAUD } else { CLASS_NORMAL };
                    return Err(Error::Data(format!("training row {id} is not a {want} transaction")));
                }
                Ok(f.clone())
            })
            .collect()
    };
    let train = TrainingSet::uniform(take(&split.normal_train_ids, false)?, take(&split.fraud_train_ids, true)?)?;
    let tests = split
        .test_ids
        .iter()
        .map(|id| {
            let (features, fraud) = &rows[id];
            TestSample {
                id: *id,
                class_label: if *fraud { CLASS_FRAUD } else { CLASS_NORMAL }.to_string(),
                features: features.clone(),
                label: if *fraud { -1 } else { 1 },
            }
        })
        .collect();
    Ok(CreditCardData { train, tests, total_rows, fraud_rows })
}

pub fn read_creditcard(path: impl AsRef<Path>, split: &CreditCardSplit) -> Result<CreditCardData> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    load_creditcard(std::io::BufReader::new(file), split)
}

/// `$ACAE_DATA_DIR/creditcard.csv`, if the variable is set and the file exists.
pub fn default_creditcard_path() -> Option<PathBuf> {
    let dir = std::env::var_os(DATA_DIR_ENV)?;
    let path = PathBuf::from(dir).join(CREDITCARD_FILE);
    path.is_file().then_some(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_iris_shape() {
        let d = bundled_iris();
        assert_eq!(d.len(), 150);
        assert_eq!(d.get(1).unwrap().features, vec![5.1, 3.5, 1.4, 0.2]);
        assert_eq!(d.get(51).unwrap().class_label, "versicolor");
        assert_eq!(d.get(150).unwrap().class_label, "virginica");
    }

    #[test]
    fn default_setosa_versicolor() {
        let pair: SpeciesPair = "setosa:versicolor".parse().unwrap();
        let split = IrisSplit::default_for(pair);
        assert_eq!(split.train_ids, vec![1, 2, 3, 4, 51, 52, 53, 54]);
        assert_eq!(split.test_ids, vec![5, 6, 7, 8, 55, 56, 57, 58]);
        let (train, tests) = load_iris(None, pair, &split).unwrap();
        assert_eq!((train.len(), train.dim()), (8, 4));
        assert_eq!(tests.iter().map(|t| t.label).collect::<Vec<_>>(), vec![1, 1, 1, 1, -1, -1, -1, -1]);
    }

    #[test]
    fn versicolor_virginica_tests() {
        let pair: SpeciesPair = "versicolor:virginica".parse().unwrap();
        let split = IrisSplit::default_for(pair);
        assert_eq!(split.test_ids[4..], [105, 106, 107, 108]);
        let (_, tests) = load_iris(None, pair, &split).unwrap();
        assert_eq!(tests[4].class_label, "virginica");
    }

    #[test]
    fn iris_errors() {
        let pair: SpeciesPair = "setosa:versicolor".parse().unwrap();
        let leak = IrisSplit { train_ids: vec![1, 51], test_ids: vec![1, 52] };
        assert!(load_iris(None, pair, &leak).is_err());
        let wrong = IrisSplit { train_ids: vec![1, 101], test_ids: vec![2] };
        assert!(load_iris(None, pair, &wrong).is_err());
        let missing = IrisSplit { train_ids: vec![1, 51], test_ids: vec![999] };
        let err = load_iris(None, pair, &missing).unwrap_err().to_string();
        assert!(err.contains("999"), "{err}");
        assert!("setosa:daisy".parse::<SpeciesPair>().is_err());
        assert!("setosa:setosa".parse::<SpeciesPair>().is_err());
        assert!(load_iris(Some(Path::new("/nonexistent/iris.csv")), pair, &IrisSplit::default_for(pair)).is_err());
    }

    fn fixture(rows: usize, fraud: &[usize]) -> String {
        let mut s = String::from("\"Time\"");
        for k in 1..=28 {
            s += &format!(",\"V{k}\"");
        }
        s += ",\"Amount\",\"Class\"\n";
        for r in 1..=rows {
            s += &format!("{r}");
            for k in 1..=28 {
                s += &format!(",{}", (r * k) as f64 * 0.01 - 0.3);
            }
            let class = if fraud.contains(&r) { 1 } else { 0 };
            s += &format!(",1.5,\"{class}\"\n");
        }
        s
    }

    #[test]
    fn creditcard_fixture() {
        let csv = fixture(20, &[11, 12, 13, 14, 19]);
        let split = CreditCardSplit {
            fraud_train_ids: vec![11, 12, 13, 14],
            test_ids: vec![5, 6, 7, 8, 19],
            ..Default::default()
        };
        let d = load_creditcard(csv.as_bytes(), &split).unwrap();
        assert_eq!((d.total_rows, d.fraud_rows), (20, 5));
        assert_eq!((d.train.len(), d.train.dim()), (8, 4));
        assert_eq!(d.train.plus()[0], vec![0.01 - 0.3, 0.02 - 0.3, 0.03 - 0.3, 0.04 - 0.3]);
        assert_eq!(d.tests.last().unwrap().label, -1);
        assert_eq!(d.tests[0].label, 1);
        let again = load_creditcard(csv.as_bytes(), &split).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn creditcard_errors() {
        let csv = fixture(20, &[11, 12, 13, 14]);
        let split = CreditCardSplit { fraud_train_ids: vec![11, 12, 13, 14], test_ids: vec![5, 400], ..Default::default() };
        let err = load_creditcard(csv.as_bytes(), &split).unwrap_err().to_string();
        assert!(err.contains("400"), "{err}");
        let wrong_class = CreditCardSplit { fraud_train_ids: vec![11, 12, 13, 15], test_ids: vec![5], ..Default::default() };
        assert!(load_creditcard(csv.as_bytes(), &wrong_class).is_err());
        let no_class = csv.replace("\"Class\"", "\"Label\"");
        let ok_split = CreditCardSplit { fraud_train_ids: vec![11, 12, 13, 14], test_ids: vec![5], ..Default::default() };
        assert!(load_creditcard(no_class.as_bytes(), &ok_split).is_err());
        let bad_feature = CreditCardSplit { features: vec!["V99".into()], ..ok_split };
        assert!(load_creditcard(csv.as_bytes(), &bad_feature).is_err());
    }
}
