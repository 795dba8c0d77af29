use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kgraph::{Declarations, KnowledgeBase, Rule, RuleSet};
use crate::model::{EntityId, Object, ObjectKind, Triple};

const GIVEN: &[&str] = &[
    "Ada", "Boris", "Clara", "Dmitri", "Elena", "Farid", "Greta", "Hugo", "Ines", "Jonas", "Kira", "Lukas", "Mira",
    "Nils", "Olga", "Pavel", "Rosa", "Stefan", "Tara", "Viktor",
];
const FAMILY: &[&str] = &[
    "Abel", "Brandt", "Castell", "Dorn", "Engel", "Falk", "Graf", "Hahn", "Ilves", "Jansen", "Krug", "Lorenz", "Moser",
    "Nagel", "Ostrom", "Pohl", "Quast", "Roth", "Seidel", "Teller",
];
const CITIES: &[&str] = &[
    "Aldova", "Brenmark", "Castria", "Delmont", "Eskar", "Fennick", "Galdor", "Hollin", "Istrel", "Jorvik", "Kelm",
    "Lunden", "Marrow", "Norvik", "Ostara", "Pellin", "Quorra", "Rendel", "Solm", "Tarvos", "Ulmar", "Varn", "Westa",
    "Yorvel",
];
const COUNTRIES: &[&str] = &["Arkadia", "Borduria", "Cascadia", "Dalmora", "Elbonia", "Florin", "Genovia", "Latveria"];
const FIELDS: &[&str] = &[
    "physics", "chemistry", "botany", "geology", "topology", "linguistics", "astronomy", "genetics", "economics",
    "cryptography",
];

/// Shape of a synthetic knowledge base.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorldSpec {
    pub people: usize,
    pub cities: usize,
    pub countries: usize,
    pub with_dates: bool,
    pub seed: u64,
}

impl Default for WorldSpec {
    fn default() -> Self {
        WorldSpec {
            people: 60,
            cities: 16,
            countries: 5,
            with_dates: true,
            seed: 7,
        }
    }
}

fn id(s: &str) -> EntityId {
    EntityId::new(s).expect("fixed names normalize")
}

/// The rule shipped with synthetic worlds.
pub fn world_rules() -> RuleSet {
    RuleSet::from_rules(vec![
        Rule::parse("born_in(?x,?y) & located_in(?y,?z) -> born_in_country(?x,?z)").expect("valid rule")
    ])
}

/// A random world of people born in cities, born in a year, working on one
/// or two fields and optionally dying on a date; cities lie in countries.
/// `born_in`, `born_year`, `died_on` and `located_in` are functional.
pub fn synthetic_world(spec: &WorldSpec) -> Result<KnowledgeBase> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut decl = Declarations::new();
    for p in ["born_in", "born_year", "died_on", "located_in"] {
        decl.declare_functional(id(p));
    }
    decl.declare_range(id("born_year"), ObjectKind::Number);
    decl.declare_range(id("died_on"), ObjectKind::Date);

    let mut names: Vec<String> = GIVEN
        .iter()
        .flat_map(|g| FAMILY.iter().map(move |f| format!("{g} {f}")))
        .collect();
    names.shuffle(&mut rng);
    let people = &names[..spec.people.min(names.len())];
    let cities = &CITIES[..spec.cities.clamp(1, CITIES.len())];
    let countries = &COUNTRIES[..spec.countries.clamp(1, COUNTRIES.len())];

    let mut triples = Vec::new();
    for city in cities {
        let country = countries.choose(&mut rng).expect("non-empty");
        triples.push(Triple::certain(id(city), id("located_in"), Object::Entity(id(country))));
    }
    for person in people {
        let p = id(person);
        let city = cities.choose(&mut rng).expect("non-empty");
        triples.push(Triple::certain(p.clone(), id("born_in"), Object::Entity(id(city))));
        let year: i32 = rng.random_range(1820..1990);
        triples.push(Triple::certain(p.clone(), id("born_year"), Object::parse_kind(ObjectKind::Number, &year.to_string())?));
        let k = rng.random_range(1..=2);
        for field in FIELDS.choose_multiple(&mut rng, k) {
            triples.push(Triple::certain(p.clone(), id("works_on"), Object::Entity(id(field))));
        }
        if spec.with_dates && rng.random_bool(0.5) {
            let age: i32 = rng.random_range(40..95);
            let date = format!("{:04}-{:02}-{:02}", year + age, rng.random_range(1..=12), rng.random_range(1..=28));
            triples.push(Triple::certain(p, id("died_on"), Object::parse_kind(ObjectKind::Date, &date)?));
        }
    }
    KnowledgeBase::from_triples(decl, triples)
}
