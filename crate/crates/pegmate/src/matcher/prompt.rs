//! Prompt construction. The two-view template is the load-bearing one; the
//! single-view and three-view variants keep its sentence structure, and the
//! name variant swaps the question for a naming request.

use serde::{Deserialize, Serialize};

use super::{InputStrategy, MatchError};

/// The standard four-image prompt. Image slots map, in order, to the peg's
/// cross-sectional and angled images followed by the hole's.
pub const TWO_VIEW_TEMPLATE: &str = "<image1> This is a cross-sectional image of a peg.\n\
<image2> This is another image of a peg from a different angle.\n\
<image3> This is a cross-sectional image of a hole.\n\
<image4> This is another image of a hole from a different angle.\n\
Can the peg in images 1 and 2 be perfectly inserted into the hole in images 3 and 4?\n\
Please answer with only yes or no.";

const CROSS_SECTIONAL_TEMPLATE: &str = "<image1> This is a cross-sectional image of a peg.\n\
<image2> This is a cross-sectional image of a hole.\n\
Can the peg in image 1 be perfectly inserted into the hole in image 2?\n\
Please answer with only yes or no.";

const ANGLED_TEMPLATE: &str = "<image1> This is an angled image of a peg.\n\
<image2> This is an angled image of a hole.\n\
Can the peg in image 1 be perfectly inserted into the hole in image 2?\n\
Please answer with only yes or no.";

const THREE_VIEW_TEMPLATE: &str = "<image1> This is a cross-sectional image of a peg.\n\
<image2> This is another image of a peg from a different angle.\n\
<image3> This is another image of a peg from a third angle.\n\
<image4> This is a cross-sectional image of a hole.\n\
<image5> This is another image of a hole from a different angle.\n\
<image6> This is another image of a hole from a third angle.\n\
Can the peg in images 1, 2 and 3 be perfectly inserted into the hole in images 4, 5 and 6?\n\
Please answer with only yes or no.";

const NAME_TEMPLATE: &str = "<image1> This is a cross-sectional image of a peg.\n\
<image2> This is another image of a peg from a different angle.\n\
<image3> This is a cross-sectional image of a hole.\n\
<image4> This is another image of a hole from a different angle.\n\
What are the names of the peg in images 1 and 2 and the hole in images 3 and 4?\n\
Please answer with only the two names, separated by a comma.";

/// One image payload bound to a `<imageN>` slot (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptImage {
    pub slot: usize,
    pub png: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub text: String,
    pub images: Vec<PromptImage>,
    pub strategy: InputStrategy,
}

/// Binds peg and hole images (PNG bytes) to the strategy's template.
/// Image order is peg views then hole views, matching the slot numbering.
pub fn build_prompt(
    peg_images: &[Vec<u8>],
    hole_images: &[Vec<u8>],
    strategy: InputStrategy,
) -> Result<PromptBundle, MatchError> {
    let (np, nh) = strategy.image_arity();
    if peg_images.len() != np || hole_images.len() != nh {
        return Err(MatchError::ArityMismatch {
            strategy,
            expected_pegs: np,
            expected_holes: nh,
            got_pegs: peg_images.len(),
            got_holes: hole_images.len(),
        });
    }
    let text = match strategy {
        InputStrategy::TwoView | InputStrategy::NoProbability => TWO_VIEW_TEMPLATE,
        InputStrategy::CrossSectionalOnly => CROSS_SECTIONAL_TEMPLATE,
        InputStrategy::AngledOnly => ANGLED_TEMPLATE,
        InputStrategy::ThreeView => THREE_VIEW_TEMPLATE,
        InputStrategy::Name => NAME_TEMPLATE,
    };
    let images = peg_images
        .iter()
        .chain(hole_images)
        .enumerate()
        .map(|(i, png)| PromptImage {
            slot: i + 1,
            png: png.clone(),
        })
        .collect();
    Ok(PromptBundle {
        text: text.to_string(),
        images,
        strategy,
    })
}
