#![allow(dead_code)]

use mathworld::convert::{lfs_to_graph, SentenceState};
use mathworld::corpus::AnnotatedMsp;
use mathworld::lf::{parse_logical_form, LogicalForm, ParseMode};
use mathworld::model::{CompareOp, ContainerStructure, NodeId, Quantity, RelationKind, VarId, WorldModel};
use mathworld::number::{int, parse_rational, Rational};

pub mod oracle;
pub mod systems;

pub type Builder = fn() -> (WorldModel, Vec<SentenceState>);

pub struct Fixture {
    pub id: &'static str,
    pub dataset: &'static str,
    pub sentences: &'static [&'static str],
    /// Gold logical forms, one per sentence.
    pub forms: &'static [&'static str],
    pub answer: &'static str,
    /// Hand-built graph for cases the form language cannot express exactly.
    pub build: Option<Builder>,
}

impl Fixture {
    pub fn lossy(&self) -> bool {
        self.build.is_some()
    }

    pub fn logical_forms(&self) -> Vec<LogicalForm> {
        self.forms
            .iter()
            .map(|t| parse_logical_form(t, ParseMode::Strict).unwrap_or_else(|e| panic!("{}: {e}", self.id)))
            .collect()
    }

    pub fn graph(&self) -> (WorldModel, Vec<SentenceState>) {
        if let Some(build) = self.build {
            return build();
        }
        let conv = lfs_to_graph(&self.logical_forms());
        assert!(conv.diagnostics.is_empty(), "{}: {:?}", self.id, conv.diagnostics);
        (conv.model, conv.states)
    }

    pub fn answer(&self) -> Rational {
        parse_rational(self.answer).unwrap()
    }

    pub fn record(&self) -> AnnotatedMsp {
        let (graph, states) = self.graph();
        AnnotatedMsp {
            id: self.id.to_string(),
            source_dataset: self.dataset.to_string(),
            sentences: self.sentences.iter().map(|s| s.to_string()).collect(),
            logical_forms: self.logical_forms(),
            graph,
            states,
            answer: self.answer(),
        }
    }
}

pub fn fixture(id: &str) -> &'static Fixture {
    FIXTURES
        .iter()
        .find(|f| f.id == id)
        .unwrap_or_else(|| panic!("no fixture {id}"))
}

pub const GOLDEN: [&str; 6] = ["cafeteria", "alice-bob", "lansing", "balloons", "gavin", "zack"];

pub fn golden_records() -> Vec<AnnotatedMsp> {
    GOLDEN.iter().map(|id| fixture(id).record()).collect()
}

pub static FIXTURES: &[Fixture] = &[
    Fixture {
        id: "cafeteria",
        dataset: "golden",
        sentences: &[
            "The school cafeteria had 14 apples.",
            "If they used 13 to make lunch for the students and then bought 49 more,",
            "how many apples would they have?",
        ],
        forms: &[
            "container(school cafeteria, 14, apple, none, none)",
            "transfer(none, school cafeteria, 13, apple, none, none) transfer(school cafeteria, none, 49, apple, none, none)",
            "container(school cafeteria, x2, apple, none, none)",
        ],
        answer: "50",
        build: None,
    },
    Fixture {
        id: "alice-bob",
        dataset: "golden",
        sentences: &[
            "Alice has 7 apples and Bob has 4 apples.",
            "Alice gives 3 apples to Bob.",
            "How many apples does Bob have now?",
        ],
        forms: &[
            "container(Alice, 7, apple, none, none) container(Bob, 4, apple, none, none)",
            "transfer(Bob, Alice, 3, apple, none, none)",
            "container(Bob, x2, apple, none, none)",
        ],
        answer: "7",
        build: None,
    },
    Fixture {
        id: "lansing",
        dataset: "golden",
        sentences: &[
            "Lansing has 25 elementary schools.",
            "There are 247 students in each school.",
            "How many elementary students are there altogether in Lansing?",
        ],
        forms: &[
            "container(Lansing, 25, school, elementary, none)",
            "rate(Lansing, 247, student, none, none, school, elementary, none)",
            "container(Lansing, x1, student, none, none)",
        ],
        answer: "6175",
        build: None,
    },
    Fixture {
        id: "balloons",
        dataset: "golden",
        sentences: &[
            "James has 232 balloons.",
            "Amy has 101 balloons.",
            "How many more balloons does James have than Amy?",
        ],
        forms: &[
            "container(James, 232, balloon, none, none)",
            "container(Amy, 101, balloon, none, none)",
            "difference(James, Amy, x1, balloon, none, none, balloon, none, none)",
        ],
        answer: "131",
        build: None,
    },
    Fixture {
        id: "gavin",
        dataset: "golden",
        sentences: &[
            "Gavin has 23 shirts.",
            "6 are blue the rest are green.",
            "How many green shirts does Gavin have?",
        ],
        forms: &[
            "container(Gavin, 23, shirt, none, none)",
            "container(Gavin, 6, shirt, blue, none) part(Gavin, shirt, none, none, Gavin, shirt, blue, none, Gavin, shirt, green, none)",
            "container(Gavin, x1, shirt, green, none)",
        ],
        answer: "17",
        build: None,
    },
    Fixture {
        id: "zack",
        dataset: "golden",
        sentences: &[
            "Zack decided to give his 3 friends 20 marbles each and kept 5.",
            "How many marbles did he initially have?",
        ],
        forms: &[
            "container(friends, 3, friend, none, none) rate(friends, 20, marble, none, none, friend, none, none) container(Zack, 5, marble, kept, none) part(Zack, marble, none, none, friends, marble, none, none, Zack, marble, kept, none)",
            "container(Zack, x2, marble, none, none)",
        ],
        answer: "65",
        build: None,
    },
    Fixture {
        id: "carrots",
        dataset: "synthetic",
        sentences: &[
            "A rabbit had 40 carrot sticks.",
            "It ate 3 of them.",
            "How many carrot sticks does the rabbit have left?",
        ],
        forms: &[
            "container(rabbit, 40, stick, carrot, none)",
            "transfer(none, rabbit, 3, stick, carrot, none)",
            "container(rabbit, x1, stick, carrot, none)",
        ],
        answer: "37",
        build: None,
    },
    Fixture {
        id: "josh",
        dataset: "synthetic",
        sentences: &["Josh had 16 marbles.", "He lost 7 marbles.", "How many marbles does he have now?"],
        forms: &[
            "container(Josh, 16, marble, none, none)",
            "transfer(none, Josh, 7, marble, none, none)",
            "container(Josh, x1, marble, none, none)",
        ],
        answer: "9",
        build: None,
    },
    Fixture {
        id: "bobby",
        dataset: "synthetic",
        sentences: &[
            "Bobby had 19 pieces of candy.",
            "He ate 2 pieces of candy.",
            "How many pieces of candy does Bobby have left?",
        ],
        forms: &[
            "container(Bobby, 19, candy, none, none)",
            "transfer(none, Bobby, 2, candy, none, none)",
            "container(Bobby, x1, candy, none, none)",
        ],
        answer: "17",
        build: None,
    },
    Fixture {
        id: "zoe",
        dataset: "synthetic",
        sentences: &[
            "Zoe had 120 stamps.",
            "Her aunt gave her 35 stamps.",
            "How many stamps does Zoe have now?",
        ],
        forms: &[
            "container(Zoe, 120, stamp, none, none)",
            "transfer(Zoe, aunt, 35, stamp, none, none)",
            "container(Zoe, x3, stamp, none, none)",
        ],
        answer: "155",
        build: None,
    },
    Fixture {
        id: "lexie",
        dataset: "synthetic",
        sentences: &[
            "Lexie had some crayons.",
            "She gave 6 crayons to her brother.",
            "Now she has 3 crayons.",
            "How many crayons did Lexie have at first?",
        ],
        forms: &[
            "",
            "transfer(brother, Lexie, 6, crayon, none, none)",
            "container(Lexie, 3, crayon, none, none)",
            "container(Lexie, x1, crayon, none, none)",
        ],
        answer: "9",
        build: None,
    },
    Fixture {
        id: "times",
        dataset: "synthetic",
        sentences: &[
            "Tom has 12 cards.",
            "Sam has 3 times as many cards as Tom.",
            "How many cards does Sam have?",
        ],
        forms: &[
            "container(Tom, 12, card, none, none)",
            "explicit(Sam, Tom, 3, card, none, none, card, none, none)",
            "container(Sam, x1, card, none, none)",
        ],
        answer: "36",
        build: None,
    },
    Fixture {
        id: "fewer",
        dataset: "synthetic",
        sentences: &[
            "Lucy has 30 pens.",
            "Lucy has 9 more pens than Mike.",
            "How many pens does Mike have?",
        ],
        forms: &[
            "container(Lucy, 30, pen, none, none)",
            "difference(Lucy, Mike, 9, pen, none, none, pen, none, none)",
            "container(Mike, x1, pen, none, none)",
        ],
        answer: "21",
        build: None,
    },
    Fixture {
        id: "shirts-twice",
        dataset: "synthetic",
        sentences: &[
            "A store has 14 red shirts.",
            "It has twice as many blue shirts as red shirts.",
            "How many blue shirts does the store have?",
        ],
        forms: &[
            "container(store, 14, shirt, red, none)",
            "explicit(store, store, 2, shirt, blue, none, shirt, red, none)",
            "container(store, x1, shirt, blue, none)",
        ],
        answer: "28",
        build: None,
    },
    Fixture {
        id: "kevin",
        dataset: "synthetic",
        sentences: &[
            "Kevin has 24 cookies.",
            "He puts 3 cookies in each bag.",
            "How many bags does he fill?",
        ],
        forms: &[
            "container(Kevin, 24, cookie, none, none)",
            "rate(Kevin, 3, cookie, none, none, bag, none, none)",
            "container(Kevin, x1, bag, none, none)",
        ],
        answer: "8",
        build: None,
    },
    Fixture {
        id: "will",
        dataset: "synthetic",
        sentences: &["Will had 4 toys.", "He got 5 more toys for his birthday.", "How many toys does Will have?"],
        forms: &[
            "container(Will, 4, toy, none, none)",
            "transfer(Will, none, 5, toy, none, none)",
            "container(Will, x1, toy, none, none)",
        ],
        answer: "9",
        build: None,
    },
    Fixture {
        id: "tom-sam",
        dataset: "synthetic",
        sentences: &[
            "Sam had 2 stamps.",
            "Tom gave Sam some stamps.",
            "Now Sam has 7 stamps.",
            "How many stamps did Tom give Sam?",
        ],
        forms: &[
            "container(Sam, 2, stamp, none, none)",
            "transfer(Sam, Tom, x1, stamp, none, none)",
            "container(Sam, 7, stamp, none, none)",
            "transfer(Sam, Tom, x1, stamp, none, none)",
        ],
        answer: "5",
        build: None,
    },
    Fixture {
        id: "birds",
        dataset: "synthetic",
        sentences: &[
            "There are 5 sparrows, 6 crows and 7 robins in a tree.",
            "How many birds are in the tree?",
        ],
        forms: &[
            "container(tree, 5, bird, sparrow, none) container(tree, 6, bird, crow, none) container(tree, 7, bird, robin, none) part(tree, bird, none, none, tree, bird, sparrow, none, tree, bird, crow, none, tree, bird, robin, none)",
            "container(tree, x1, bird, none, none)",
        ],
        answer: "18",
        build: None,
    },
    Fixture {
        id: "class",
        dataset: "synthetic",
        sentences: &["A class has 45 students.", "18 of them are boys.", "How many girls are in the class?"],
        forms: &[
            "container(class, 45, student, none, none)",
            "container(class, 18, student, boy, none) part(class, student, none, none, class, student, boy, none, class, student, girl, none)",
            "container(class, x1, student, girl, none)",
        ],
        answer: "27",
        build: None,
    },
    Fixture {
        id: "coffee",
        dataset: "synthetic",
        sentences: &[
            "Ana has 72 grams of coffee.",
            "Each cup uses 12 grams of coffee.",
            "How many cups can she make?",
        ],
        forms: &[
            "container(Ana, 72, coffee, none, gram)",
            "rate(Ana, 12, coffee, none, gram, cup, none, none)",
            "container(Ana, x1, cup, none, none)",
        ],
        answer: "6",
        build: None,
    },
    Fixture {
        id: "mary-packs",
        dataset: "synthetic",
        sentences: &["Mary buys 6 packs of pens.", "Each pack has 7 pens.", "How many pens does Mary have?"],
        forms: &[
            "container(Mary, 6, pack, none, none)",
            "rate(Mary, 7, pen, none, none, pack, none, none)",
            "container(Mary, x1, pen, none, none)",
        ],
        answer: "42",
        build: None,
    },
    Fixture {
        id: "times-unknown",
        dataset: "synthetic",
        sentences: &[
            "Lily has 15 apples.",
            "Max has 5 apples.",
            "How many times as many apples does Lily have as Max?",
        ],
        forms: &[
            "container(Lily, 15, apple, none, none)",
            "container(Max, 5, apple, none, none)",
            "explicit(Lily, Max, x1, apple, none, none, apple, none, none)",
        ],
        answer: "3",
        build: None,
    },
    Fixture {
        id: "mia",
        dataset: "synthetic",
        sentences: &[
            "Mia had 20 stickers.",
            "She gave away 6 stickers.",
            "Then she gave away 5 more.",
            "How many stickers does Mia have left?",
        ],
        forms: &[
            "container(Mia, 20, sticker, none, none)",
            "transfer(none, Mia, 6, sticker, none, none)",
            "transfer(none, Mia, 5, sticker, none, none)",
            "container(Mia, x2, sticker, none, none)",
        ],
        answer: "9",
        build: None,
    },
    Fixture {
        id: "dan-eve",
        dataset: "synthetic",
        sentences: &[
            "Dan has 5 marbles.",
            "Eve has 3 more marbles than Dan.",
            "Eve finds 4 more marbles.",
            "How many marbles does Eve have?",
        ],
        forms: &[
            "container(Dan, 5, marble, none, none)",
            "difference(Eve, Dan, 3, marble, none, none, marble, none, none)",
            "transfer(Eve, none, 4, marble, none, none)",
            "container(Eve, x2, marble, none, none)",
        ],
        answer: "12",
        build: None,
    },
    Fixture {
        id: "trays",
        dataset: "synthetic",
        sentences: &[
            "Sam baked 4 trays of cookies.",
            "There are 7 cookies on each tray.",
            "How many cookies did Sam bake?",
        ],
        forms: &[
            "container(Sam, 4, tray, none, none)",
            "rate(Sam, 7, cookie, none, none, tray, none, none)",
            "container(Sam, x1, cookie, none, none)",
        ],
        answer: "28",
        build: None,
    },
    Fixture {
        id: "homeless",
        dataset: "lossy",
        sentences: &[
            "Next on her list are the homeless people where she spent a total of $900.00.",
            "She gave $325.00 to the first set of homeless families and $260.00 to the second set of families.",
            "How much did she give to the last set of homeless families?",
        ],
        forms: &[
            "container(she, 900, dollar, none, none)",
            "container(she, 325, dollar, first, none) container(she, 260, dollar, second, none)",
            "container(she, x1, dollar, last, none) part(she, dollar, none, none, she, dollar, first, none, she, dollar, second, none, she, dollar, last, none)",
        ],
        answer: "315",
        build: Some(homeless),
    },
    Fixture {
        id: "pens-split",
        dataset: "lossy",
        sentences: &[
            "Alice has 20 pens.",
            "4 of them are red.",
            "3 of them are blue.",
            "The rest are black.",
            "How many black pens does Alice have?",
        ],
        forms: &[
            "container(Alice, 20, pen, none, none)",
            "container(Alice, 4, pen, red, none)",
            "container(Alice, 3, pen, blue, none)",
            "",
            "container(Alice, x1, pen, black, none) part(Alice, pen, none, none, Alice, pen, red, none, Alice, pen, blue, none, Alice, pen, black, none)",
        ],
        answer: "13",
        build: Some(pens_split),
    },
];

fn part_whole(g: &mut WorldModel, part: NodeId, whole: NodeId) {
    g.add_relation(RelationKind::PartWhole, None, part, whole).unwrap();
}

/// Parts of one whole introduced over two sentences.
fn homeless() -> (WorldModel, Vec<SentenceState>) {
    let mut g = WorldModel::new();
    let s = |attr: &str| ContainerStructure::new("she", "dollar").with_attribute(attr);
    let whole = g.add_container(ContainerStructure::new("she", "dollar"), Quantity::Known(int(900)));
    let mut states = vec![SentenceState::of(&g)];
    let first = g.add_container(s("first"), Quantity::Known(int(325)));
    let second = g.add_container(s("second"), Quantity::Known(int(260)));
    part_whole(&mut g, first, whole);
    part_whole(&mut g, second, whole);
    states.push(SentenceState::of(&g));
    let x = g.fresh_var();
    let last = g.add_container(s("last"), Quantity::Var(x));
    part_whole(&mut g, last, whole);
    g.set_ref_var(Some(x)).unwrap();
    states.push(SentenceState::of(&g));
    (g, states)
}

/// One part edge per sentence.
fn pens_split() -> (WorldModel, Vec<SentenceState>) {
    let mut g = WorldModel::new();
    let s = |attr: &str| ContainerStructure::new("Alice", "pen").with_attribute(attr);
    let whole = g.add_container(ContainerStructure::new("Alice", "pen"), Quantity::Known(int(20)));
    let mut states = vec![SentenceState::of(&g)];
    for (attr, n) in [("red", 4), ("blue", 3)] {
        let p = g.add_container(s(attr), Quantity::Known(int(n)));
        part_whole(&mut g, p, whole);
        states.push(SentenceState::of(&g));
    }
    let x = g.fresh_var();
    let black = g.add_container(s("black"), Quantity::Var(x));
    part_whole(&mut g, black, whole);
    states.push(SentenceState::of(&g));
    g.set_ref_var(Some(x)).unwrap();
    states.push(SentenceState::of(&g));
    (g, states)
}

/// Small random graph from raw choices; relations that fail validation are skipped.
pub fn random_graph(containers: &[(u8, u8, Option<u8>)], relations: &[(u8, u8, u8, Option<u8>)]) -> WorldModel {
    const LABELS: [&str; 3] = ["Ann", "Ben", "Cal"];
    const ENTITIES: [&str; 3] = ["apple", "pen", "box"];
    let mut g = WorldModel::new();
    let mut ids = Vec::new();
    for &(l, e, q) in containers {
        let structure = ContainerStructure::new(LABELS[l as usize % 3], ENTITIES[e as usize % 3]);
        let quantity = match q {
            Some(n) => Quantity::Known(int(n as i64 % 5 + 1)),
            None => Quantity::Var(g.fresh_var()),
        };
        ids.push(g.add_container(structure, quantity));
    }
    if ids.is_empty() {
        return g;
    }
    for &(k, s, t, q) in relations {
        let (source, target) = (ids[s as usize % ids.len()], ids[t as usize % ids.len()]);
        let quantity = || match q {
            Some(n) => Quantity::Known(int(n as i64 % 4 + 1)),
            None => Quantity::Var(VarId(1000 + g.next_id())),
        };
        let (kind, quantity) = match k % 5 {
            0 => (RelationKind::Comparison { op: CompareOp::Add }, Some(quantity())),
            1 => (RelationKind::Comparison { op: CompareOp::Mul }, Some(quantity())),
            2 => (RelationKind::Rate, Some(quantity())),
            3 => (RelationKind::PartWhole, None),
            _ => {
                let label = g.container(source).unwrap().structure.label.clone();
                (
                    RelationKind::Transfer {
                        recipient: None,
                        sender: Some(label),
                    },
                    Some(quantity()),
                )
            }
        };
        let _ = g.add_relation(kind, quantity, source, target);
    }
    g
}

/// Copy of `g` with every node id moved, preserving creation order.
pub fn renumbered(g: &WorldModel, offset: NodeId) -> WorldModel {
    let mut out = WorldModel::new();
    for c in g.containers() {
        let mut c = c.clone();
        c.id += offset;
        out.insert_container(c).unwrap();
    }
    for r in g.relations() {
        let mut r = r.clone();
        r.id += offset;
        r.source += offset;
        r.target += offset;
        out.insert_relation(r).unwrap();
    }
    out.set_ref_var(g.ref_var()).unwrap();
    out
}
