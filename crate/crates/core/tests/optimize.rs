use jscc_core::catalog::find;
use jscc_core::exit::{channel_threshold, ExitConfig};
use jscc_core::optimize::{
    de_optimize, enumerate_search, Block, DeParams, FreeCell, LinkRule, OptimizeError, SearchSpace,
};

fn link(row: usize, col: usize) -> FreeCell {
    FreeCell {
        block: Block::Link,
        row,
        col,
        lo: 0,
        hi: 3,
    }
}

#[test]
fn de_finds_the_enumeration_optimum_on_tiny_spaces() {
    let template = find("example2_j4").unwrap().code();
    let space = SearchSpace::new(
        template,
        vec![link(0, 1), link(1, 0)],
        LinkRule::Either,
        false,
    )
    .unwrap();
    assert!(space.candidate_count() <= 16);
    let config = ExitConfig::default();
    let ranked = enumerate_search(&space, &config).unwrap();
    let params = DeParams {
        population: 8,
        generations: 15,
        ..DeParams::default()
    };
    let de = de_optimize(&space, params, &config, 4);
    assert_eq!(de.best.assignment, ranked[0].assignment);
    assert_eq!(de.best.threshold_db, ranked[0].threshold_db);
}

#[test]
fn de_never_loses_to_the_template_and_respects_the_space() {
    let template = find("example3_org").unwrap().code();
    let cells = vec![
        link(1, 0),
        link(2, 0),
        link(3, 2),
        FreeCell {
            block: Block::Channel,
            row: 0,
            col: 1,
            lo: 0,
            hi: 2,
        },
    ];
    let space = SearchSpace::new(template.clone(), cells, LinkRule::Fixed, false).unwrap();
    let config = ExitConfig::default();
    let base = channel_threshold(&template, config).unwrap().threshold_db;
    let params = DeParams {
        population: 10,
        generations: 6,
        ..DeParams::default()
    };
    let de = de_optimize(&space, params, &config, 21);
    assert!(de.best.threshold_db <= base);
    assert_eq!(de.history.len(), 7);
    assert!(de
        .history
        .windows(2)
        .all(|w| w[1].best_threshold_db <= w[0].best_threshold_db));
    for e in &de.evaluated {
        assert!(space.within_bounds(&e.assignment));
        if let Some(code) = space.build(&e.assignment) {
            assert!(code.link().orientation().allows(1, 0));
            assert!(code.channel().get(0, 1) <= 2);
        } else {
            assert!(e.threshold_db.is_infinite());
        }
    }
    // same seed, same search
    assert_eq!(de_optimize(&space, params, &config, 21), de);
}

#[test]
fn punctured_only_pins_other_columns() {
    let template = find("example3_org").unwrap().code();
    // link columns are channel columns 4..=7, of which 4 and 7 are punctured
    let cells = vec![
        link(2, 1),
        link(3, 0),
        FreeCell {
            block: Block::Channel,
            row: 2,
            col: 3,
            lo: 0,
            hi: 3,
        },
    ];
    let space = SearchSpace::new(template, cells, LinkRule::Fixed, true).unwrap();
    assert_eq!((space.cells()[0].lo, space.cells()[0].hi), (0, 0));
    assert_eq!((space.cells()[1].lo, space.cells()[1].hi), (0, 3));
    assert_eq!((space.cells()[2].lo, space.cells()[2].hi), (0, 3));
}

#[test]
fn oversized_spaces_refuse_enumeration() {
    let template = find("example3_org").unwrap().code();
    let cells = (0..5)
        .flat_map(|r| (0..5).map(move |c| (r, c)))
        .filter(|&(r, c)| r < 4 && c < 5)
        .map(|(row, col)| FreeCell {
            block: Block::Source,
            row,
            col,
            lo: 0,
            hi: 3,
        })
        .collect();
    let space = SearchSpace::new(template, cells, LinkRule::Fixed, false).unwrap();
    assert!(matches!(
        enumerate_search(&space, &ExitConfig::default()),
        Err(OptimizeError::Explosion(_))
    ));
}

#[test]
fn empty_space_is_the_template() {
    let template = find("example1_orig").unwrap().code();
    let space = SearchSpace::new(template.clone(), vec![], LinkRule::Fixed, false).unwrap();
    let ranked = enumerate_search(&space, &ExitConfig::default()).unwrap();
    assert_eq!(ranked.len(), 1);
    assert_eq!(space.build(&ranked[0].assignment).unwrap(), template);
}
