#include "facerec/server.hpp"

namespace facerec {

void EventHub::publish(const PipelineEvent& event) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        buffer_.push_back(to_json(event).dump());
        while (buffer_.size() > backlog_) {
            buffer_.pop_front();
            ++first_;
        }
    }
    cv_.notify_all();
}

std::uint64_t EventHub::cursor() const {
    std::lock_guard lock(mutex_);
    return first_ + buffer_.size();
}

std::vector<std::string> EventHub::wait(std::uint64_t& cursor, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return closed_ || first_ + buffer_.size() > cursor; });
    // A subscriber that fell behind the backlog resumes at the oldest event.
    if (cursor < first_) cursor = first_;
    std::vector<std::string> out;
    for (std::uint64_t seq = cursor; seq < first_ + buffer_.size(); ++seq) out.push_back(buffer_[seq - first_]);
    cursor = first_ + buffer_.size();
    return out;
}

void EventHub::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool EventHub::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

}  // namespace facerec
