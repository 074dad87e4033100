#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gist/kg.hpp"
#include "gist/linker.hpp"
#include "gist/metrics.hpp"

namespace gist {

/// Toy graph with five image-caption queries. Each query has its own block
/// of ten nodes; the planted gist of a block is a category reachable only
/// through the category shared by the two labels, so it is a border node
/// and never a seed or intermediate.
struct ToyFixture {
  KnowledgeGraph graph;
  std::vector<GistQuery> queries;
  Judgments qrels;
  std::map<std::string, NodeId> planted;
};

namespace detail {

struct ToyNode {
  const char* title;
  const char* text;
};

// Block layout, by offset from the block base id:
//   0 label A   1 label B   2 mention C   3 category shared by A and B
//   4 article on a B-C path   5 planted gist (category above 3)
//   6 neighbour of A   7 neighbour of B   8 two hops from B   9 neighbour of C
struct ToyBlock {
  std::array<ToyNode, 10> nodes;
};

inline const std::array<ToyBlock, 5>& toy_blocks() {
  static const std::array<ToyBlock, 5> blocks = {{
      {{{{"Orangutan", "A great ape with long arms and reddish hair."},
         {"Rainforest", "Dense tropical woodland with heavy rainfall all year."},
         {"Borneo", "The third largest island in the world, shared by three countries."},
         {"Tropical ecology", "Living systems of the tropics."},
         {"Palm oil", "Edible vegetable fat pressed from the fruit of a palm."},
         {"Deforestation", "Logging of the rainforest on Borneo pushes the orangutan toward extinction."},
         {"Sumatra", "A large island in western Indonesia."},
         {"Canopy", "The upper layer of a forest formed by tree crowns."},
         {"Photosynthesis", "The process by which plants turn light into sugar."},
         {"Malaysia", "A country in Southeast Asia."}}}},
      {{{{"Polar bear", "A large white carnivore of the far north."},
         {"Sea ice", "Frozen ocean water that forms and melts with the seasons."},
         {"Arctic", "The northernmost region of the planet."},
         {"Cryosphere", "Frozen parts of the planet."},
         {"Greenland", "A large island between two oceans."},
         {"Climate change", "Warming melts the sea ice of the Arctic and leaves the polar bear stranded."},
         {"Seal", "A marine mammal with flippers."},
         {"Glacier", "A slowly moving mass of compacted snow."},
         {"Snow", "Crystals of frozen water falling from clouds."},
         {"Norway", "A Nordic country on the Scandinavian peninsula."}}}},
      {{{{"Ballot box", "A sealed container used to collect votes."},
         {"Crowd", "A large group of people gathered together."},
         {"Parliament", "A legislative assembly of elected representatives."},
         {"Elections", "Formal decision making by voters."},
         {"Protest", "Public expression of objection."},
         {"Democracy", "Every citizen in the crowd drops a vote in the ballot box to choose a parliament."},
         {"Voting booth", "A small private enclosure for marking a paper."},
         {"Rally", "A mass meeting held in support of a cause."},
         {"Speech", "A formal address delivered to an audience."},
         {"Constitution", "The fundamental rules that govern a state."}}}},
      {{{{"Stethoscope", "An acoustic instrument for listening to the heart and lungs."},
         {"Hospital bed", "An adjustable frame designed for patients."},
         {"Nurse", "A trained caregiver who looks after the sick."},
         {"Medical equipment", "Devices used in diagnosis and treatment."},
         {"Ward", "A room shared by several patients."},
         {"Public health", "A nurse with a stethoscope beside every hospital bed keeps care available to all."},
         {"Doctor", "A licensed physician."},
         {"Patient", "A person receiving treatment."},
         {"Illness", "A condition of poor physical wellbeing."},
         {"Clinic", "A facility for outpatient treatment."}}}},
      {{{{"Oil rig", "An offshore platform for drilling wells."},
         {"Barrel", "A cylindrical container and a unit of volume."},
         {"OPEC", "An intergovernmental organisation of exporting countries."},
         {"Petroleum industry", "Exploration, extraction and refining of petroleum."},
         {"Crude oil", "Unrefined petroleum as it leaves the ground."},
         {"Energy crisis", "When OPEC cuts output, every barrel pumped from an oil rig costs more."},
         {"North Sea", "A marginal sea of the Atlantic."},
         {"Refinery", "A plant that separates petroleum into products."},
         {"Gasoline", "A fuel for spark ignition engines."},
         {"Saudi Arabia", "A kingdom on the Arabian peninsula."}}}},
  }};
  return blocks;
}

inline constexpr std::array<const char*, 5> kToyQueryIds = {"q1", "q2", "q3", "q4", "q5"};

}  // namespace detail

inline ToyFixture make_toy_fixture() {
  constexpr std::uint32_t kRoot = 1, kEarth = 2, kMercury = 3, kPlanet = 4, kElement = 5;
  GraphBuilder b;
  b.add_category(kRoot, "Main topics");
  b.add_article(kEarth, "Earth", "The third planet from the Sun.");
  b.add_node({NodeId{kMercury}, NodeKind::Article, "Mercury (disambiguation)", true, ""});
  b.add_article(kPlanet, "Mercury (planet)", "The smallest planet and the closest to the Sun.");
  b.add_article(kElement, "Mercury (element)", "A heavy metal that is liquid at room temperature.");
  b.add_edge(kMercury, "disambiguates", kPlanet);
  b.add_edge(kMercury, "disambiguates", kElement);
  b.add_edge(kPlanet, "related", kEarth);

  const auto& blocks = detail::toy_blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::uint32_t base = static_cast<std::uint32_t>(10 * (i + 1));
    for (std::uint32_t k = 0; k < 10; ++k) {
      const auto& n = blocks[i].nodes[k];
      if (k == 3 || k == 5) {
        b.add_category(base + k, n.title, n.text);
      } else {
        b.add_article(base + k, n.title, n.text);
      }
    }
    const auto at = [&](std::uint32_t k) { return base + k; };
    b.add_edge(at(0), "category", at(3));
    b.add_edge(at(1), "category", at(3));
    b.add_edge(at(2), "related", at(0));
    b.add_edge(at(1), "related", at(4));
    b.add_edge(at(4), "related", at(2));
    b.add_edge(at(3), "super-category", at(5));
    b.add_edge(at(5), "super-category", kRoot);
    b.add_edge(at(0), "located-in", at(6));
    b.add_edge(at(1), "related", at(7));
    b.add_edge(at(7), "related", at(8));
    b.add_edge(at(8), "related", kEarth);
    b.add_edge(at(2), "related", at(9));
    b.add_edge(at(9), "related", kEarth);
  }

  ToyFixture fx{std::move(b).build(), {}, {}, {}};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::uint32_t base = static_cast<std::uint32_t>(10 * (i + 1));
    const std::string id = detail::kToyQueryIds[i];
    const auto& n = blocks[i].nodes;
    fx.queries.push_back({id, {n[0].title, n[1].title}, {n[2].title}});
    fx.planted.emplace(id, NodeId{base + 5});
    fx.qrels.set(id, NodeId{base + 5}, Judgments::kCoreGrade);
    fx.qrels.set(id, NodeId{base + 3}, 3);
    fx.qrels.set(id, NodeId{base + 4}, 2);
    fx.qrels.set(id, NodeId{base + 6}, 1);
  }
  return fx;
}

/// Writes nodes.tsv, edges.tsv, queries.tsv and qrels.tsv into `dir`.
inline void write_toy_fixture(const std::filesystem::path& dir) {
  const ToyFixture fx = make_toy_fixture();
  std::filesystem::create_directories(dir);
  save_graph(fx.graph, dir / "nodes.tsv", dir / "edges.tsv");
  write_queries(fx.queries, dir / "queries.tsv");
  write_qrels(fx.qrels, dir / "qrels.tsv");
}

}  // namespace gist
