#include "morphflow/vertex_data.hpp"

#include "morphflow/error.hpp"
#include "overloaded.hpp"

namespace morphflow {

using detail::overloaded;

std::size_t image_arity(const TransformKind& kind) noexcept {
  return std::holds_alternative<SumOf2>(kind) ? 2 : 1;
}

std::string_view transform_name(const TransformKind& kind) noexcept {
  return std::visit(overloaded{
                        [](const Identity&) { return std::string_view("identity"); },
                        [](const Negation&) { return std::string_view("negation"); },
                        [](const SumOf2&) { return std::string_view("sum_of_2"); },
                        [](const Wave&) { return std::string_view("wave"); },
                    },
                    kind);
}

std::string_view variant_name(const VertexData& data) noexcept {
  return std::visit(overloaded{
                        [](const ConstantImage&) { return std::string_view("constant"); },
                        [](const DynamicImage&) { return std::string_view("dynamic"); },
                        [](const Sampler&) { return std::string_view("sampler"); },
                        [](const SignedSampler&) { return std::string_view("signed_sampler"); },
                        [](const NumericControl&) { return std::string_view("numeric_control"); },
                        [](const ClickControl&) { return std::string_view("click_control"); },
                        [](const Clock&) { return std::string_view("clock"); },
                        [](const GraphRef&) { return std::string_view("graph_ref"); },
                    },
                    data);
}

bool is_image_stream(const VertexData& data) noexcept {
  return std::holds_alternative<ConstantImage>(data) || std::holds_alternative<DynamicImage>(data) ||
         std::holds_alternative<GraphRef>(data);
}

bool is_control(const VertexData& data) noexcept {
  return std::holds_alternative<NumericControl>(data) || std::holds_alternative<ClickControl>(data) ||
         std::holds_alternative<Clock>(data);
}

const ImageFrame& current_frame(const VertexData& data) {
  if (const auto* c = std::get_if<ConstantImage>(&data)) return c->frame;
  if (const auto* d = std::get_if<DynamicImage>(&data)) return d->source_buffer;
  if (const auto* g = std::get_if<GraphRef>(&data)) return g->source_buffer;
  throw Error(Errc::precondition, "vertex data '" + std::string(variant_name(data)) + "' is not an image stream");
}

const ImageFrame& previous_frame(const VertexData& data) {
  if (const auto* c = std::get_if<ConstantImage>(&data)) return c->frame;
  if (const auto* d = std::get_if<DynamicImage>(&data)) return d->target_buffer;
  if (const auto* g = std::get_if<GraphRef>(&data)) return g->target_buffer;
  throw Error(Errc::precondition, "vertex data '" + std::string(variant_name(data)) + "' is not an image stream");
}

DynamicImage make_dynamic(TransformKind kind, int width, int height) {
  return DynamicImage{std::move(kind), ImageFrame(width, height), ImageFrame(width, height), std::nullopt};
}

GraphRef make_graph_ref(GraphId graph, int width, int height) {
  return GraphRef{graph, LayoutState{}, ImageFrame(width, height), ImageFrame(width, height)};
}

}  // namespace morphflow
