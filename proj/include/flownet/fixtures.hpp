#pragma once

#include "flownet/delay.hpp"
#include "flownet/graph.hpp"

namespace flownet::fixtures {

/// Single loop edge: unit speed, no absorption, full recirculation,
/// one control channel feeding the edge.
inline GraphDescription loop_description() {
  GraphDescription d;
  d.vertices = {"v1"};
  EdgeSpec e;
  e.id = "e1";
  e.tail = "v1";
  e.head = "v1";
  e.velocity = PiecewiseConstant::constant(1.0);
  e.absorption = PiecewiseConstant::constant(0.0);
  e.weight = 1.0;
  d.edges = {e};
  d.control = Matrix::Ones(1, 1);
  return d;
}

inline MetricGraph loop() { return MetricGraph::build(loop_description()); }

/// Loop whose gain exactly balances one transit: q = c = 1.
inline MetricGraph loop_absorbing() {
  GraphDescription d = loop_description();
  d.edges[0].absorption = PiecewiseConstant::constant(1.0);
  return MetricGraph::build(d);
}

/// Two vertices joined by a directed cycle, control on the first edge.
inline GraphDescription two_cycle_description() {
  GraphDescription d;
  d.vertices = {"v1", "v2"};
  EdgeSpec e1, e2;
  e1.id = "e1";
  e1.tail = "v1";
  e1.head = "v2";
  e1.velocity = PiecewiseConstant::constant(1.0);
  e1.absorption = PiecewiseConstant::constant(0.0);
  e2.id = "e2";
  e2.tail = "v2";
  e2.head = "v1";
  e2.velocity = PiecewiseConstant::constant(1.0);
  e2.absorption = PiecewiseConstant::constant(0.0);
  d.edges = {e1, e2};
  d.control = Matrix::Zero(2, 1);
  d.control(0, 0) = 1.0;
  return d;
}

inline MetricGraph two_cycle() {
  return MetricGraph::build(two_cycle_description());
}

/// Closed 2-cycle with different per-edge constant speeds; used for mass
/// conservation runs.
inline MetricGraph two_cycle_speeds() {
  GraphDescription d = two_cycle_description();
  d.edges[1].velocity = PiecewiseConstant::constant(2.0);
  return MetricGraph::build(d);
}

/// One feeder edge splitting 0.3 / 0.7 into two branches. The feeder has a
/// piecewise speed with unit value at the inflow end and mild absorption.
inline GraphDescription branching_description() {
  GraphDescription d;
  d.vertices = {"v1", "v2", "v3", "v4"};
  EdgeSpec e1, e2, e3;
  e1.id = "e1";
  e1.tail = "v1";
  e1.head = "v2";
  e1.velocity = PiecewiseConstant({0.0, 0.5, 1.0}, {2.0, 1.0});
  e1.absorption = PiecewiseConstant::constant(-0.2);
  e1.weight = 1.0;
  e2.id = "e2";
  e2.tail = "v2";
  e2.head = "v3";
  e2.velocity = PiecewiseConstant::constant(1.0);
  e2.absorption = PiecewiseConstant::constant(0.0);
  e2.weight = 0.3;
  e3.id = "e3";
  e3.tail = "v2";
  e3.head = "v4";
  e3.velocity = PiecewiseConstant::constant(1.0);
  e3.absorption = PiecewiseConstant::constant(0.0);
  e3.weight = 0.7;
  d.edges = {e1, e2, e3};
  d.control = Matrix::Zero(3, 2);
  d.control(0, 0) = 1.0;
  d.control(1, 1) = 1.0;
  return d;
}

inline MetricGraph branching() {
  return MetricGraph::build(branching_description());
}

/// Junction with two feeders and two exits, an allocation matrix that
/// differs from the graph weights, and a common discrete airborne delay.
inline GraphDescription junction_description() {
  GraphDescription d;
  d.vertices = {"a", "b", "j", "c1", "c2"};
  auto mk = [](const char* id, const char* tail, const char* head,
               PiecewiseConstant c, double w) {
    EdgeSpec e;
    e.id = id;
    e.tail = tail;
    e.head = head;
    e.velocity = std::move(c);
    e.absorption = PiecewiseConstant::constant(0.0);
    e.weight = w;
    return e;
  };
  d.edges = {
      mk("e1", "a", "j", PiecewiseConstant::constant(1.0), 1.0),
      mk("e2", "b", "j", PiecewiseConstant({0.0, 0.5, 1.0}, {2.0, 1.0}), 1.0),
      mk("e3", "j", "c1", PiecewiseConstant::constant(1.0), 0.6),
      mk("e4", "j", "c2", PiecewiseConstant::constant(1.0), 0.4),
  };
  d.control = Matrix::Zero(4, 2);
  d.control(0, 0) = 1.0;
  d.control(1, 1) = 1.0;
  Matrix H = Matrix::Zero(4, 4);
  H(2, 0) = 0.6;
  H(3, 0) = 0.4;
  H(2, 1) = 0.5;
  H(3, 1) = 0.5;
  d.allocation = H;
  return d;
}

inline MetricGraph junction() {
  return MetricGraph::build(junction_description());
}

inline double junction_delay() { return 0.5; }

inline DelayBank junction_delays() {
  std::vector<DelayMeasure> ms;
  for (int j = 0; j < 4; ++j)
    ms.push_back(DelayMeasure::single_atom(junction_delay(), 1.0));
  return DelayBank(std::move(ms));
}

/// Two-edge path with a uniformly distributed delay kernel on both edges.
inline GraphDescription path_description() {
  GraphDescription d;
  d.vertices = {"v1", "v2", "v3"};
  EdgeSpec e1, e2;
  e1.id = "e1";
  e1.tail = "v1";
  e1.head = "v2";
  e1.velocity = PiecewiseConstant::constant(1.0);
  e1.absorption = PiecewiseConstant::constant(0.0);
  e2.id = "e2";
  e2.tail = "v2";
  e2.head = "v3";
  e2.velocity = PiecewiseConstant::constant(1.0);
  e2.absorption = PiecewiseConstant::constant(-0.1);
  d.edges = {e1, e2};
  d.control = Matrix::Zero(2, 1);
  d.control(0, 0) = 1.0;
  return d;
}

inline MetricGraph path() { return MetricGraph::build(path_description()); }

inline double path_delay() { return 0.4; }

inline DelayBank path_delays() {
  std::vector<DelayMeasure> ms;
  for (int j = 0; j < 2; ++j)
    ms.push_back(DelayMeasure::uniform_density(path_delay(), 1.0));
  return DelayBank(std::move(ms));
}

/// Two identical parallel edges driven identically plus a return edge: the
/// antisymmetric difference of the parallel pair is invisible to the input.
inline GraphDescription symmetric_parallel_description() {
  GraphDescription d;
  d.vertices = {"v1", "v2"};
  auto mk = [](const char* id, const char* tail, const char* head, double w) {
    EdgeSpec e;
    e.id = id;
    e.tail = tail;
    e.head = head;
    e.velocity = PiecewiseConstant::constant(1.0);
    e.absorption = PiecewiseConstant::constant(0.0);
    e.weight = w;
    return e;
  };
  d.edges = {mk("e1", "v1", "v2", 0.5), mk("e2", "v1", "v2", 0.5),
             mk("e3", "v2", "v1", 1.0)};
  d.control = Matrix::Zero(3, 1);
  d.control(0, 0) = 1.0;
  d.control(1, 0) = 1.0;
  return d;
}

inline MetricGraph symmetric_parallel() {
  return MetricGraph::build(symmetric_parallel_description());
}

} // namespace flownet::fixtures
